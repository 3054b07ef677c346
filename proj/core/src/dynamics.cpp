// Copyright 2026 The spinlock Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "spinlock/dynamics.hpp"

#include "spinlock/common.hpp"
#include "spinlock/io.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace spinlock {

namespace {

using cd = std::complex<double>;

void check_grid(std::span<const double> t_grid)
{
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!std::isfinite(t_grid[i]) || t_grid[i] < 0.0)
            throw InputError("time grid entries must be finite and >= 0");
        if (i > 0 && t_grid[i] < t_grid[i - 1])
            throw InputError("time grid must be non-decreasing");
    }
}

BlochVector to_frame(const BlochVector& drive_frame, Frame frame, double rabi, double t)
{
    if (frame == Frame::Drive)
        return drive_frame;
    const double c = std::cos(rabi * t);
    const double s = std::sin(rabi * t);
    return {drive_frame.x, drive_frame.y * c + drive_frame.z * s, -drive_frame.y * s + drive_frame.z * c};
}

// Exact step of length h with phi constant, in the drive frame where
// H'/hbar = (Omega/2)(sigma_x + phi sigma_y).
void rotate(Spinor& psi, double rabi, double phi, double h)
{
    const double len = std::sqrt(1.0 + phi * phi);
    const double half_angle = 0.5 * rabi * len * h;
    const double c = std::cos(half_angle);
    const double s = std::sin(half_angle);
    const double nx = 1.0 / len;
    const double ny = phi / len;
    const cd a = psi(0);
    const cd b = psi(1);
    const cd minus_i_s(0.0, -s);
    psi(0) = c * a + minus_i_s * cd(nx, -ny) * b;
    psi(1) = c * b + minus_i_s * cd(nx, ny) * a;
}

class PhaseSampler {
public:
    explicit PhaseSampler(const PhaseSignal& signal) : signal_(signal) {}

    double at_step(double t_mid) const
    {
        double phi = sample_modulation(signal_.modulation, t_mid);
        if (signal_.noise) {
            const auto& s = signal_.noise->samples;
            auto idx = static_cast<std::size_t>(std::max(0.0, std::floor(t_mid / signal_.noise->dt)));
            phi += s[std::min(idx, s.size() - 1)];
        }
        return phi;
    }

private:
    const PhaseSignal& signal_;
};

} // namespace

Spinor plus_x_state()
{
    const double r = 1.0 / std::sqrt(2.0);
    return Spinor(cd(r, 0.0), cd(r, 0.0));
}

Spinor spinor_from_bloch(double x, double y, double z)
{
    const double n = std::sqrt(x * x + y * y + z * z);
    if (!(n > 0.0))
        throw InputError("Bloch vector must be non-zero");
    x /= n;
    y /= n;
    z /= n;
    const double theta = std::acos(std::clamp(z, -1.0, 1.0));
    const double phi = std::atan2(y, x);
    return Spinor(cd(std::cos(0.5 * theta), 0.0), std::polar(std::sin(0.5 * theta), phi));
}

double BlochVector::norm() const { return std::sqrt(x * x + y * y + z * z); }

BlochVector bloch_of(const Spinor& psi)
{
    const cd ab = std::conj(psi(0)) * psi(1);
    return {2.0 * ab.real(), 2.0 * ab.imag(), std::norm(psi(0)) - std::norm(psi(1))};
}

std::string bloch_csv(const BlochRecord& record)
{
    std::string out = "t_s,sx,sy,sz,se_sx,se_sy,se_sz\n";
    for (std::size_t i = 0; i < record.size(); ++i) {
        out += io::csv_line({io::format_double(record.times[i]), io::format_double(record.sx[i]),
                             io::format_double(record.sy[i]), io::format_double(record.sz[i]),
                             io::format_double(record.se_sx[i]), io::format_double(record.se_sy[i]),
                             io::format_double(record.se_sz[i])});
    }
    return out;
}

void write_bloch_csv(const std::filesystem::path& path, const BlochRecord& record)
{
    io::write_file_atomic(path, bloch_csv(record));
}

VectorizedDensity VectorizedDensity::from_spinor(const Spinor& psi)
{
    VectorizedDensity d;
    d.rho << psi(0) * std::conj(psi(0)), psi(0) * std::conj(psi(1)), psi(1) * std::conj(psi(0)),
        psi(1) * std::conj(psi(1));
    return d;
}

VectorizedDensity VectorizedDensity::from_bloch(double x, double y, double z)
{
    VectorizedDensity d;
    d.rho << cd(0.5 * (1.0 + z), 0.0), cd(0.5 * x, -0.5 * y), cd(0.5 * x, 0.5 * y), cd(0.5 * (1.0 - z), 0.0);
    return d;
}

BlochVector VectorizedDensity::bloch() const
{
    const cd r12 = rho(1);
    const cd r21 = rho(2);
    return {(r12 + r21).real(), (cd(0.0, 1.0) * (r12 - r21)).real(), (rho(0) - rho(3)).real()};
}

bool VectorizedDensity::is_physical(double tol) const
{
    const cd trace = rho(0) + rho(3);
    if (std::abs(trace - 1.0) > tol)
        return false;
    if (std::abs(rho(1) - std::conj(rho(2))) > tol)
        return false;
    if (std::abs(rho(0).imag()) > tol || std::abs(rho(3).imag()) > tol)
        return false;
    return rho(0).real() >= -tol && rho(0).real() <= 1.0 + tol && rho(3).real() >= -tol &&
           rho(3).real() <= 1.0 + tol;
}

DriveConfig DriveConfig::with_default_step(double rabi, double noise_dt)
{
    DriveConfig d;
    d.rabi = rabi;
    d.dt = 0.01 / rabi;
    if (noise_dt > 0.0)
        d.dt = std::min(d.dt, noise_dt);
    return d;
}

void DriveConfig::validate() const
{
    if (!(rabi > 0.0) || !std::isfinite(rabi))
        throw InputError("Rabi frequency must be positive");
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw InputError("propagation step must be positive");
    if (!(dt * rabi < 0.1))
        throw InputError("propagation step too coarse: dt * Omega must be < 0.1");
    if (std::abs(initial.squaredNorm() - 1.0) > 1e-9)
        throw InputError("initial state must be normalised");
}

NoiseFrameField noise_frame_hamiltonian(double rabi, double phi, double t)
{
    const double amp = 0.5 * rabi * phi;
    return {amp * std::cos(rabi * t), -amp * std::sin(rabi * t)};
}

BlochRecord propagate_trajectory(const DriveConfig& drive, const PhaseSignal& signal, std::span<const double> t_grid)
{
    drive.validate();
    signal.modulation.validate();
    check_grid(t_grid);

    BlochRecord rec;
    rec.frame = drive.frame;
    rec.times.assign(t_grid.begin(), t_grid.end());
    const std::size_t n = t_grid.size();
    rec.sx.resize(n);
    rec.sy.resize(n);
    rec.sz.resize(n);
    rec.se_sx.assign(n, 0.0);
    rec.se_sy.assign(n, 0.0);
    rec.se_sz.assign(n, 0.0);
    if (n == 0)
        return rec;

    if (signal.noise) {
        const auto& nz = *signal.noise;
        if (nz.samples.empty() || !(nz.dt > 0.0))
            throw InputError("noise trajectory is empty");
        if (nz.duration() < t_grid.back() * (1.0 - 1e-12))
            throw InputError("noise trajectory (" + std::to_string(nz.duration()) +
                             " s) is shorter than the time grid (" + std::to_string(t_grid.back()) + " s)");
    }

    const PhaseSampler sampler(signal);
    const double dt = drive.dt;
    const double omega = drive.rabi;
    Spinor psi = drive.initial;
    std::size_t steps = 0;
    double max_phi = 0.0;

    for (std::size_t i = 0; i < n; ++i) {
        const double target = t_grid[i];
        while (static_cast<double>(steps + 1) * dt <= target + 1e-9 * dt) {
            const double t0 = static_cast<double>(steps) * dt;
            const double phi = sampler.at_step(t0 + 0.5 * dt);
            max_phi = std::max(max_phi, std::abs(phi));
            rotate(psi, omega, phi, dt);
            ++steps;
        }
        const double t0 = static_cast<double>(steps) * dt;
        const double rest = target - t0;
        BlochVector b;
        if (rest > 1e-12 * dt) {
            Spinor partial = psi;
            const double phi = sampler.at_step(t0 + 0.5 * rest);
            max_phi = std::max(max_phi, std::abs(phi));
            rotate(partial, omega, phi, rest);
            b = bloch_of(partial);
        }
        else {
            b = bloch_of(psi);
        }
        b = to_frame(b, drive.frame, omega, target);
        rec.sx[i] = b.x;
        rec.sy[i] = b.y;
        rec.sz[i] = b.z;
    }
    rec.strong_phase_trajectories = max_phi > kStrongPhaseThreshold ? 1 : 0;
    return rec;
}

BlochRecord ensemble_average(const DriveConfig& drive, const PsdModel& model, const ModulationSpec& modulation,
                             std::size_t n_traj, std::uint64_t master_seed, std::span<const double> t_grid,
                             unsigned threads)
{
    if (n_traj < 1)
        throw InputError("ensemble needs at least one trajectory");
    drive.validate();
    model.validate();
    modulation.validate();
    check_grid(t_grid);

    const std::size_t n = t_grid.size();
    const double t_end = n ? t_grid.back() : 0.0;
    const bool noisy = !model.is_zero();
    const double duration = std::max(t_end, 2.0 * drive.dt);

    std::vector<BlochRecord> runs(n_traj);
    parallel_for(n_traj, threads, [&](std::size_t i) {
        PhaseSignal signal;
        signal.modulation = modulation;
        NoiseTrajectory noise;
        if (noisy) {
            noise = synthesize_trajectory(model, duration, drive.dt, derive_seed(master_seed, i));
            signal.noise = &noise;
        }
        runs[i] = propagate_trajectory(drive, signal, t_grid);
    });

    BlochRecord out;
    out.frame = drive.frame;
    out.times.assign(t_grid.begin(), t_grid.end());
    out.trajectories = n_traj;
    for (const auto& r : runs)
        out.strong_phase_trajectories += r.strong_phase_trajectories;

    std::vector<double> column(n_traj);
    auto reduce = [&](auto member, std::vector<double>& mean, std::vector<double>& se) {
        mean.resize(n);
        se.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t i = 0; i < n_traj; ++i)
                column[i] = (runs[i].*member)[k];
            const double m = pairwise_sum(column) / static_cast<double>(n_traj);
            mean[k] = m;
            if (n_traj < 2) {
                se[k] = 0.0;
                continue;
            }
            for (double& v : column)
                v = (v - m) * (v - m);
            const double var = pairwise_sum(column) / static_cast<double>(n_traj - 1);
            se[k] = std::sqrt(var / static_cast<double>(n_traj));
        }
    };
    reduce(&BlochRecord::sx, out.sx, out.se_sx);
    reduce(&BlochRecord::sy, out.sy, out.se_sy);
    reduce(&BlochRecord::sz, out.sz, out.se_sz);
    return out;
}

Eigen::Matrix4cd liouville_superoperator(double rabi, double phi, double t)
{
    const cd i(0.0, 1.0);
    const double c = std::cos(rabi * t);
    const double s = std::sin(rabi * t);
    Eigen::Matrix4cd k;
    k << 0.0, -i * c, -i * c, 0.0,
        i * c, -2.0 * s, 0.0, -i * c,
        i * c, 0.0, 2.0 * s, -i * c,
        0.0, i * c, i * c, 0.0;
    return (0.5 * rabi * phi / i) * k;
}

Eigen::Matrix4d decay_exponent_matrix()
{
    Eigen::Matrix4d m;
    m << 1, 0, 0, -1,
        0, 3, 1, 0,
        0, 1, 3, 0,
        -1, 0, 0, 1;
    return m;
}

DecayOperator analytic_decay_operator(double rabi, double psd_at_rabi, double t)
{
    if (!(psd_at_rabi >= 0.0) || !(t >= 0.0))
        throw InputError("analytic_decay_operator needs S >= 0 and t >= 0");
    DecayOperator op;
    op.chi2 = 0.25 * rabi * rabi * psd_at_rabi * 0.5 * t;
    const double e2 = std::exp(-2.0 * op.chi2);
    const double e4 = std::exp(-4.0 * op.chi2);
    op.phi << 1 + e2, 0, 0, 1 - e2,
        0, e2 + e4, -e2 + e4, 0,
        0, -e2 + e4, e2 + e4, 0,
        1 - e2, 0, 0, 1 + e2;
    op.phi *= 0.5;
    return op;
}

BlochRecord coherent_evolution(double rabi, double beta, double delta, std::span<const double> t_grid)
{
    check_grid(t_grid);
    BlochRecord rec;
    rec.frame = Frame::Drive;
    rec.times.assign(t_grid.begin(), t_grid.end());
    const double sideband_rabi = 0.5 * beta * rabi;
    for (double t : t_grid) {
        const double envelope = std::sin(sideband_rabi * t);
        rec.sx.push_back(std::cos(sideband_rabi * t));
        rec.sy.push_back(envelope * std::sin(rabi * t + delta));
        rec.sz.push_back(-envelope * std::cos(rabi * t + delta));
    }
    rec.se_sx.assign(t_grid.size(), 0.0);
    rec.se_sy.assign(t_grid.size(), 0.0);
    rec.se_sz.assign(t_grid.size(), 0.0);
    return rec;
}

double combined_sigma_x(double rabi, double beta, double psd_at_rabi, double t)
{
    return std::cos(0.5 * beta * rabi * t) * std::exp(-0.5 * rabi * rabi * psd_at_rabi * t);
}

} // namespace spinlock
