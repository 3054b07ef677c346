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

#include "spinlock/spectroscopy.hpp"

#include "spinlock/common.hpp"
#include "spinlock/io.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <utility>

namespace spinlock {

namespace {

constexpr std::array<std::pair<unsigned, std::string_view>, 6> kFlagNames{{
    {kFlagWeakNoise, "weak_noise"},
    {kFlagStrongPhase, "strong_phase"},
    {kFlagRabiSpread, "rabi_spread"},
    {kFlagBelowFloor, "below_floor"},
    {kFlagRateClamped, "rate_clamped"},
    {kFlagBetaFallback, "beta_fallback"},
}};

constexpr std::uint64_t kShotStream = 0x73686f7473ULL;
constexpr double kSpreadLimit = 1e-3;

// Binomial standard error of p_hat; Wilson half-width (z = 1) when p_hat is 0 or 1.
double probability_stderr(std::size_t k, std::size_t shots)
{
    const double n = static_cast<double>(shots);
    const double p = static_cast<double>(k) / n;
    if (k == 0 || k == shots)
        return std::sqrt(p * (1.0 - p) / n + 0.25 / (n * n)) / (1.0 + 1.0 / n);
    return std::sqrt(p * (1.0 - p) / n);
}

std::vector<std::pair<std::size_t, std::size_t>> blocks(const ScanDataset& data)
{
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::size_t start = 0;
    for (std::size_t i = 1; i <= data.rows.size(); ++i) {
        if (i == data.rows.size() || data.rows[i].omega != data.rows[start].omega) {
            out.emplace_back(start, i);
            start = i;
        }
    }
    return out;
}

} // namespace

std::string format_flags(unsigned flags)
{
    std::string out;
    for (const auto& [bit, name] : kFlagNames) {
        if (flags & bit) {
            if (!out.empty())
                out += '|';
            out += name;
        }
    }
    return out.empty() ? "ok" : out;
}

unsigned parse_flags(std::string_view text)
{
    if (text == "ok" || text.empty())
        return 0;
    unsigned flags = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('|', pos), text.size());
        const auto token = text.substr(pos, end - pos);
        const auto it = std::find_if(kFlagNames.begin(), kFlagNames.end(),
                                     [&](const auto& f) { return f.second == token; });
        if (it == kFlagNames.end())
            throw InputError("unknown flag '" + std::string(token) + "'");
        flags |= it->first;
        pos = end + 1;
    }
    return flags;
}

void ProtocolConfig::validate() const
{
    if (rabi.empty())
        throw InputError("protocol needs at least one Rabi frequency");
    for (std::size_t i = 0; i < rabi.size(); ++i) {
        if (!(rabi[i] > 0.0) || !std::isfinite(rabi[i]))
            throw InputError("Rabi frequencies must be positive");
        if (i > 0 && !(rabi[i] > rabi[i - 1]))
            throw InputError("Rabi frequencies must be strictly increasing");
    }
    if (times.size() != 1 && times.size() != rabi.size())
        throw InputError("protocol needs one shared time grid or one grid per Rabi frequency");
    for (const auto& grid : times) {
        if (grid.empty())
            throw InputError("protocol time grids must be non-empty");
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (!(grid[i] >= 0.0) || !std::isfinite(grid[i]))
                throw InputError("protocol times must be finite and >= 0");
            if (i > 0 && !(grid[i] > grid[i - 1]))
                throw InputError("protocol times must be strictly increasing");
        }
    }
    if (shots < 1)
        throw InputError("shots per point must be >= 1");
    if (trajectories < 1)
        throw InputError("trajectories per point must be >= 1");
    if (!(step_factor > 0.0 && step_factor < 0.1))
        throw InputError("step factor Omega dt must lie in (0, 0.1)");
    noise.validate();
    modulation.validate();
    if (transition == Transition::BlueSideband) {
        if (!motion)
            throw InputError("sideband protocol needs a motion section");
        motion->mode.validate();
        motion->motional_noise.validate();
        if (!(motion->nbar >= 0.0))
            throw InputError("mean phonon number must be >= 0");
    }
}

std::span<const double> ProtocolConfig::times_for(std::size_t index) const
{
    return times.size() == 1 ? std::span<const double>(times.front()) : std::span<const double>(times.at(index));
}

WeakNoiseReport weak_noise_check(double rabi, const PsdModel& model, double t_max)
{
    if (!(rabi > 0.0) || !(t_max >= 0.0))
        throw InputError("weak-noise check needs Omega > 0 and t_max >= 0");
    WeakNoiseReport r;
    if (model.is_zero())
        return r;
    auto s = [&](double w) { return evaluate_psd(model, w); };
    const double var =
        boost::math::quadrature::gauss_kronrod<double, 31>::integrate(s, 0.5 * rabi, 2.0 * rabi, 15, 1e-9) / kPi;
    r.rms_phase = std::sqrt(std::max(0.0, var));
    r.decay_exponent = 0.5 * rabi * rabi * evaluate_psd(model, rabi) * t_max;
    const bool rms_bad = r.rms_phase > kWeakNoiseRmsLimit;
    const bool exp_bad = r.decay_exponent > kWeakNoiseExponentLimit;
    r.ok = !rms_bad && !exp_bad;
    if (rms_bad)
        r.diagnostic += "rms phase " + io::format_double(r.rms_phase) + " rad over [Omega/2, 2 Omega] exceeds 0.3";
    if (exp_bad) {
        if (!r.diagnostic.empty())
            r.diagnostic += "; ";
        r.diagnostic += "decay exponent " + io::format_double(r.decay_exponent) + " exceeds 5";
    }
    return r;
}

ScanDataset simulate_protocol(const ProtocolConfig& config)
{
    config.validate();
    ScanDataset data;
    PsdModel model = config.noise;
    if (config.transition == Transition::BlueSideband) {
        const auto& m = *config.motion;
        data.rabi_scale = average_sideband_rabi(m.mode.lamb_dicke, m.nbar);
        data.rabi_spread = rabi_spread(m.mode.lamb_dicke, m.nbar);
        model = model + m.motional_noise;
        if (data.rabi_spread >= kSpreadLimit)
            data.warnings.push_back("sideband Rabi-frequency spread " + io::format_double(data.rabi_spread) +
                                    " exceeds 1e-3; the single-frequency model is approximate");
    }

    const std::size_t n_omega = config.rabi.size();
    std::vector<std::vector<ScanPoint>> per_omega(n_omega);
    std::vector<std::string> notes(n_omega);
    parallel_for(n_omega, config.threads, [&](std::size_t j) {
        const double omega = config.rabi[j] * data.rabi_scale;
        const auto times = config.times_for(j);
        DriveConfig drive;
        drive.rabi = omega;
        drive.dt = config.step_factor / omega;
        const BlochRecord rec = ensemble_average(drive, model, config.modulation, config.trajectories,
                                                 derive_seed(config.seed, j), times, 1);
        const WeakNoiseReport weak = weak_noise_check(omega, model, times.back());
        unsigned base = 0;
        if (rec.strong_phase_trajectories > 0)
            base |= kFlagStrongPhase;
        if (data.rabi_spread >= kSpreadLimit)
            base |= kFlagRabiSpread;
        if (!weak.ok)
            notes[j] = "Omega = " + io::format_double(omega) + " rad/s: " + weak.diagnostic;

        std::mt19937_64 rng(derive_seed(config.seed ^ kShotStream, j));
        auto& rows = per_omega[j];
        rows.reserve(times.size());
        for (std::size_t i = 0; i < times.size(); ++i) {
            const double p = std::clamp(0.5 * (1.0 + rec.sx[i]), 0.0, 1.0);
            std::binomial_distribution<std::size_t> shots(config.shots, p);
            const std::size_t k = shots(rng);
            const double p_hat = static_cast<double>(k) / static_cast<double>(config.shots);
            const double shot_se = 2.0 * probability_stderr(k, config.shots);
            ScanPoint pt;
            pt.omega = omega;
            pt.t = times[i];
            pt.sx_mean = 2.0 * p_hat - 1.0;
            pt.sx_stderr = std::sqrt(shot_se * shot_se + rec.se_sx[i] * rec.se_sx[i]);
            pt.shots = config.shots;
            pt.flags = base;
            const double exponent = 0.5 * omega * omega * evaluate_psd(model, omega) * times[i];
            if (weak.rms_phase > kWeakNoiseRmsLimit || exponent > kWeakNoiseExponentLimit)
                pt.flags |= kFlagWeakNoise;
            rows.push_back(pt);
        }
    });
    for (std::size_t j = 0; j < n_omega; ++j) {
        data.rows.insert(data.rows.end(), per_omega[j].begin(), per_omega[j].end());
        if (!notes[j].empty())
            data.warnings.push_back("weak-noise limit violated at " + notes[j]);
    }
    return data;
}

std::string scan_csv(const ScanDataset& data)
{
    std::string out = "omega_rad_s,t_s,sx_mean,sx_stderr,shots,flags\n";
    for (const auto& r : data.rows)
        out += io::csv_line({io::format_double(r.omega), io::format_double(r.t), io::format_double(r.sx_mean),
                             io::format_double(r.sx_stderr), std::to_string(r.shots), format_flags(r.flags)});
    return out;
}

void write_scan_csv(const std::filesystem::path& path, const ScanDataset& data)
{
    io::write_file_atomic(path, scan_csv(data));
}

ScanDataset read_scan_csv(const std::filesystem::path& path)
{
    const auto table = io::parse_csv(io::read_file(path));
    const std::size_t c_omega = table.column("omega_rad_s");
    const std::size_t c_t = table.column("t_s");
    const std::size_t c_sx = table.column("sx_mean");
    const std::size_t c_se = table.column("sx_stderr");
    const std::size_t c_shots = table.column("shots");
    const std::size_t c_flags = table.column("flags");
    ScanDataset data;
    for (const auto& row : table.rows) {
        ScanPoint p;
        p.omega = io::parse_double(row[c_omega], "omega_rad_s");
        p.t = io::parse_double(row[c_t], "t_s");
        p.sx_mean = io::parse_double(row[c_sx], "sx_mean");
        p.sx_stderr = io::parse_double(row[c_se], "sx_stderr");
        const double shots = io::parse_double(row[c_shots], "shots");
        if (!(shots >= 1.0) || shots != std::floor(shots))
            throw InputError("scan file: shots must be a positive integer");
        p.shots = static_cast<std::size_t>(shots);
        p.flags = parse_flags(row[c_flags]);
        data.rows.push_back(p);
    }
    if (data.rows.empty())
        throw InputError("scan file " + path.string() + " contains no data rows");
    return data;
}

std::vector<OmegaFit> fit_scan(const ScanDataset& data, FitChoice choice, DampedCosineOptions options)
{
    if (data.rows.empty())
        throw InputError("scan contains no data rows");
    std::vector<OmegaFit> out;
    for (const auto& [begin, end] : blocks(data)) {
        std::vector<double> t, y, e;
        OmegaFit of;
        of.omega = data.rows[begin].omega;
        for (std::size_t i = begin; i < end; ++i) {
            t.push_back(data.rows[i].t);
            y.push_back(data.rows[i].sx_mean);
            e.push_back(data.rows[i].sx_stderr);
            of.flags |= data.rows[i].flags & (kFlagWeakNoise | kFlagStrongPhase | kFlagRabiSpread);
        }
        if (choice == FitChoice::Exponential) {
            ExponentialFitOptions eo;
            eo.fit_amplitude = options.fit_amplitude;
            eo.amplitude = options.amplitude;
            of.fit = fit_exponential(t, y, e, eo);
        }
        else {
            of.fit = fit_damped_cosine(t, y, e, of.omega, options);
        }
        if (of.fit.rate_clamped)
            of.flags |= kFlagRateClamped;
        if (of.fit.beta_fallback)
            of.flags |= kFlagBetaFallback;
        out.push_back(std::move(of));
    }
    return out;
}

SpectrumEstimate reconstruct_spectrum(std::span<const OmegaFit> fits, DetectionFloor floor)
{
    SpectrumEstimate est;
    for (const auto& f : fits) {
        if (!f.fit.success)
            throw NumericalError("fit at Omega = " + io::format_double(f.omega) + " rad/s failed: " + f.fit.message);
        SpectrumRow r;
        r.omega = f.omega;
        r.rate = f.fit.rate;
        r.rate_se = f.fit.rate_se;
        const double w2 = f.omega * f.omega;
        r.s_nu = 2.0 * r.rate;
        r.s_nu_err = 2.0 * r.rate_se;
        r.s_phi = r.s_nu / w2;
        r.s_phi_err = r.s_nu_err / w2;
        r.flags = f.flags;
        if (f.fit.model == DecayModel::DampedCosine) {
            r.beta = f.fit.beta;
            r.beta_se = f.fit.beta_se;
            r.delta_nu = frequency_modulation_depth(r.beta, f.omega);
        }
        else {
            r.delta_nu = std::numeric_limits<double>::quiet_NaN();
        }
        if (floor.flags(r.s_nu))
            r.flags |= kFlagBelowFloor;
        est.rows.push_back(r);
    }
    return est;
}

std::string spectrum_csv(const SpectrumEstimate& spectrum)
{
    std::string out = "omega_rad_s,S_phi,S_nu,S_nu_err,delta_nu_Hz,flags\n";
    for (const auto& r : spectrum.rows)
        out += io::csv_line({io::format_double(r.omega), io::format_double(r.s_phi), io::format_double(r.s_nu),
                             io::format_double(r.s_nu_err), io::format_double(r.delta_nu), format_flags(r.flags)});
    return out;
}

void write_spectrum_csv(const std::filesystem::path& path, const SpectrumEstimate& spectrum)
{
    io::write_file_atomic(path, spectrum_csv(spectrum));
}

} // namespace spinlock
