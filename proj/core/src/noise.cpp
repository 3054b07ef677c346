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

#include "spinlock/noise.hpp"

#include "spinlock/common.hpp"
#include "spinlock/io.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <random>
#include <string>

namespace spinlock {

namespace {

// FFTW planning is not thread safe; execution on distinct plans is.
std::mutex& fftw_planner_mutex()
{
    static std::mutex m;
    return m;
}

struct FftwDeleter {
    void operator()(void* p) const noexcept { fftw_free(p); }
};

template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwDeleter>;

template <typename T>
FftwBuffer<T> fftw_buffer(std::size_t n)
{
    auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * std::max<std::size_t>(n, 1)));
    if (!p)
        throw std::bad_alloc();
    return FftwBuffer<T>(p);
}

class Plan {
public:
    explicit Plan(fftw_plan p) : plan_(p)
    {
        if (!plan_)
            throw Error("FFTW planning failed");
    }
    Plan(const Plan&) = delete;
    Plan& operator=(const Plan&) = delete;
    ~Plan()
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan_);
    }
    void execute() const { fftw_execute(plan_); }

private:
    fftw_plan plan_;
};

Plan plan_r2c(int n, double* in, fftw_complex* out)
{
    std::lock_guard lock(fftw_planner_mutex());
    return Plan(fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE));
}

Plan plan_c2r(int n, fftw_complex* in, double* out)
{
    std::lock_guard lock(fftw_planner_mutex());
    return Plan(fftw_plan_dft_c2r_1d(n, in, out, FFTW_ESTIMATE));
}

int checked_fft_size(std::size_t n)
{
    if (n > static_cast<std::size_t>(std::numeric_limits<int>::max()))
        throw InputError("trajectory too long for a single FFT");
    return static_cast<int>(n);
}

double lorentzian(const LorentzianPeak& p, double w)
{
    const double hw = 0.5 * p.full_width;
    const double d = w - p.center;
    return p.height * hw * hw / (d * d + hw * hw);
}

PsdSample sample_component(const ParametricPsd& m, double w)
{
    double s = m.white_floor;
    if (m.background_amplitude != 0.0) {
        const bool in_band = !m.background_band ||
                             (w >= m.background_band->first && w <= m.background_band->second);
        if (in_band) {
            if (w == 0.0) {
                if (m.background_exponent < 0.0)
                    throw DomainError("power-law PSD is singular at omega = 0 (exponent " +
                                      io::format_double(m.background_exponent) + ")");
                if (m.background_exponent == 0.0)
                    s += m.background_amplitude;
            }
            else {
                s += m.background_amplitude * std::pow(w / m.reference_frequency, m.background_exponent);
            }
        }
    }
    for (const auto& p : m.peaks)
        s += lorentzian(p, w) + lorentzian(p, -w);
    return {s, false};
}

PsdSample sample_component(const TabulatedPsd& t, double w)
{
    const auto& x = t.omega;
    const auto& y = t.value;
    if (w <= x.front())
        return {y.front(), w < x.front()};
    if (w >= x.back())
        return {y.back(), w > x.back()};
    const auto it = std::upper_bound(x.begin(), x.end(), w);
    const std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
    const double x0 = x[i], x1 = x[i + 1], y0 = y[i], y1 = y[i + 1];
    if (x0 > 0.0 && y0 > 0.0 && y1 > 0.0) {
        const double f = std::log(w / x0) / std::log(x1 / x0);
        return {y0 * std::exp(f * std::log(y1 / y0)), false};
    }
    const double f = (w - x0) / (x1 - x0);
    return {y0 + f * (y1 - y0), false};
}

void validate_component(const ParametricPsd& m)
{
    auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
    if (!finite_nonneg(m.background_amplitude) || !finite_nonneg(m.white_floor))
        throw InputError("PSD amplitudes must be finite and non-negative");
    if (!std::isfinite(m.background_exponent))
        throw InputError("PSD exponent must be finite");
    if (!(m.reference_frequency > 0.0) || !std::isfinite(m.reference_frequency))
        throw InputError("PSD reference frequency must be positive");
    if (m.background_band) {
        const auto [lo, hi] = *m.background_band;
        if (!(lo >= 0.0) || !(hi > lo))
            throw InputError("PSD band must satisfy 0 <= low < high");
    }
    for (const auto& p : m.peaks) {
        if (!finite_nonneg(p.center) || !finite_nonneg(p.height) || !(p.full_width > 0.0))
            throw InputError("PSD peak needs center >= 0, height >= 0, width > 0");
    }
}

void validate_component(const TabulatedPsd& t)
{
    if (t.omega.size() != t.value.size() || t.omega.empty())
        throw InputError("tabulated PSD needs equally sized, non-empty columns");
    for (std::size_t i = 0; i < t.omega.size(); ++i) {
        if (!std::isfinite(t.omega[i]) || t.omega[i] < 0.0)
            throw InputError("tabulated PSD frequencies must be finite and >= 0");
        if (!std::isfinite(t.value[i]) || t.value[i] < 0.0)
            throw InputError("tabulated PSD values must be finite and >= 0");
        if (i > 0 && !(t.omega[i] > t.omega[i - 1]))
            throw InputError("tabulated PSD frequencies must be strictly increasing");
    }
}

double mean_of(std::span<const double> v)
{
    return pairwise_sum(v) / static_cast<double>(v.size());
}

} // namespace

PsdModel::PsdModel(PsdComponent component) { components_.push_back(std::move(component)); }

PsdModel::PsdModel(std::vector<PsdComponent> components) : components_(std::move(components)) {}

PsdModel PsdModel::white(double floor)
{
    ParametricPsd p;
    p.white_floor = floor;
    return PsdModel(p);
}

PsdModel PsdModel::power_law(double amplitude, double exponent, double reference,
                             std::optional<std::pair<double, double>> band)
{
    ParametricPsd p;
    p.background_amplitude = amplitude;
    p.background_exponent = exponent;
    p.reference_frequency = reference;
    p.background_band = band;
    return PsdModel(p);
}

bool PsdModel::is_zero() const noexcept
{
    for (const auto& c : components_) {
        if (const auto* p = std::get_if<ParametricPsd>(&c)) {
            if (p->background_amplitude != 0.0 || p->white_floor != 0.0)
                return false;
            for (const auto& pk : p->peaks)
                if (pk.height != 0.0)
                    return false;
        }
        else {
            for (double v : std::get<TabulatedPsd>(c).value)
                if (v != 0.0)
                    return false;
        }
    }
    return true;
}

PsdModel operator+(const PsdModel& a, const PsdModel& b)
{
    std::vector<PsdComponent> all = a.components_;
    all.insert(all.end(), b.components_.begin(), b.components_.end());
    return PsdModel(std::move(all));
}

PsdModel PsdModel::scaled(double factor) const
{
    if (!(factor >= 0.0))
        throw InputError("PSD scale factor must be non-negative");
    PsdModel out = *this;
    for (auto& c : out.components_) {
        if (auto* p = std::get_if<ParametricPsd>(&c)) {
            p->background_amplitude *= factor;
            p->white_floor *= factor;
            for (auto& pk : p->peaks)
                pk.height *= factor;
        }
        else {
            for (double& v : std::get<TabulatedPsd>(c).value)
                v *= factor;
        }
    }
    return out;
}

void PsdModel::validate() const
{
    for (const auto& c : components_)
        std::visit([](const auto& comp) { validate_component(comp); }, c);
}

PsdSample sample_psd(const PsdModel& model, double omega)
{
    if (!std::isfinite(omega))
        throw DomainError("PSD evaluated at non-finite frequency");
    const double w = std::abs(omega);
    PsdSample total;
    for (const auto& c : model.components()) {
        const PsdSample s = std::visit([w](const auto& comp) { return sample_component(comp, w); }, c);
        total.value += s.value;
        total.extrapolated = total.extrapolated || s.extrapolated;
    }
    return total;
}

double evaluate_psd(const PsdModel& model, double omega) { return sample_psd(model, omega).value; }

double convert_psd(double value, double omega, PsdDirection direction)
{
    if (direction == PsdDirection::PhaseToFrequency)
        return omega * omega * value;
    if (omega == 0.0)
        throw DomainError("frequency-to-phase PSD conversion is undefined at omega = 0");
    return value / (omega * omega);
}

void ModulationSpec::validate() const
{
    for (const auto& t : tones) {
        if (!(t.omega > 0.0) || !std::isfinite(t.omega))
            throw InputError("modulation frequency must be positive");
        if (!(t.beta >= 0.0) || !std::isfinite(t.beta))
            throw InputError("modulation index must be non-negative");
        if (!std::isfinite(t.phase))
            throw InputError("modulation phase must be finite");
    }
}

double sample_modulation(const ModulationSpec& spec, double t)
{
    double phi = 0.0;
    for (const auto& tone : spec.tones)
        phi += tone.beta * std::cos(tone.omega * t + tone.phase);
    return phi;
}

std::pair<double, double> synthesis_band(double duration, double dt)
{
    const std::size_t n = static_cast<std::size_t>(std::floor(duration / dt + 1e-9)) + 1;
    const std::size_t m = std::bit_ceil(2 * n);
    return {kTwoPi / (static_cast<double>(m) * dt), kPi / dt};
}

NoiseTrajectory synthesize_trajectory(const PsdModel& model, double duration, double dt, std::uint64_t seed)
{
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw InputError("synthesis step dt must be positive");
    if (!(duration >= 2.0 * dt) || !std::isfinite(duration))
        throw InputError("synthesis duration must be at least 2 dt");
    model.validate();

    const std::size_t n = static_cast<std::size_t>(std::floor(duration / dt + 1e-9)) + 1;
    NoiseTrajectory traj{dt, std::vector<double>(n, 0.0), seed};
    if (model.is_zero())
        return traj;

    const std::size_t m = std::bit_ceil(2 * n);
    const std::size_t half = m / 2;
    const double domega = kTwoPi / (static_cast<double>(m) * dt);
    const double bin_scale = 1.0 / (static_cast<double>(m) * dt);

    std::vector<double> amplitude(half + 1, 0.0);
    for (std::size_t k = 1; k <= half; ++k) {
        const double w = domega * static_cast<double>(k);
        const double s = evaluate_psd(model, w);
        if (!std::isfinite(s) || s < 0.0) {
            auto bad = [&](double at) {
                const double v = evaluate_psd(model, at);
                return !std::isfinite(v) || v < 0.0;
            };
            const bool lower = bad(kPi / dt) ? false : (bad(domega) || k <= half / 2);
            throw InputError(std::string("PSD is not integrable over the representable band: non-finite near the ") +
                             (lower ? "lower" : "upper") + " band edge " +
                             io::format_double(lower ? domega : kPi / dt) + " rad/s (at " + io::format_double(w) +
                             " rad/s)");
        }
        amplitude[k] = std::sqrt(s * bin_scale);
    }

    auto spectrum = fftw_buffer<fftw_complex>(half + 1);
    auto signal = fftw_buffer<double>(m);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    spectrum[0][0] = 0.0;
    spectrum[0][1] = 0.0;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (std::size_t k = 1; k < half; ++k) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        spectrum[k][0] = amplitude[k] * inv_sqrt2 * re;
        spectrum[k][1] = amplitude[k] * inv_sqrt2 * im;
    }
    spectrum[half][0] = amplitude[half] * gauss(rng);
    spectrum[half][1] = 0.0;

    {
        const Plan plan = plan_c2r(checked_fft_size(m), spectrum.get(), signal.get());
        plan.execute();
    }
    std::copy(signal.get(), signal.get() + n, traj.samples.begin());
    return traj;
}

TabulatedPsd estimate_psd(std::span<const NoiseTrajectory> trajectories)
{
    if (trajectories.empty())
        throw InputError("estimate_psd needs at least one trajectory");
    const std::size_t n = trajectories.front().samples.size();
    const double dt = trajectories.front().dt;
    if (n < 2 || !(dt > 0.0))
        throw InputError("estimate_psd needs trajectories with >= 2 samples and dt > 0");
    for (const auto& t : trajectories) {
        if (t.samples.size() != n || std::abs(t.dt - dt) > 1e-12 * dt)
            throw InputError("estimate_psd: trajectories have mismatched grids");
    }

    const std::size_t bins = n / 2 + 1;
    auto in = fftw_buffer<double>(n);
    auto out = fftw_buffer<fftw_complex>(bins);
    const Plan plan = plan_r2c(checked_fft_size(n), in.get(), out.get());

    std::vector<std::vector<double>> per_bin(bins, std::vector<double>(trajectories.size()));
    const double norm = dt / static_cast<double>(n);
    for (std::size_t j = 0; j < trajectories.size(); ++j) {
        const auto& s = trajectories[j].samples;
        const double mean = mean_of(s);
        for (std::size_t i = 0; i < n; ++i)
            in[i] = s[i] - mean;
        plan.execute();
        for (std::size_t k = 0; k < bins; ++k)
            per_bin[k][j] = norm * (out[k][0] * out[k][0] + out[k][1] * out[k][1]);
    }

    TabulatedPsd est;
    est.omega.resize(bins);
    est.value.resize(bins);
    for (std::size_t k = 0; k < bins; ++k) {
        est.omega[k] = kTwoPi * static_cast<double>(k) / (static_cast<double>(n) * dt);
        est.value[k] = mean_of(per_bin[k]);
    }
    return est;
}

CorrelationTable autocorrelation(const NoiseTrajectory& trajectory, double max_lag)
{
    const std::size_t n = trajectory.samples.size();
    if (n < 2 || !(trajectory.dt > 0.0))
        throw InputError("autocorrelation needs >= 2 samples and dt > 0");
    if (!(max_lag >= 0.0) || !(max_lag < 0.5 * trajectory.duration()))
        throw InputError("autocorrelation: max_lag must be below half the trajectory duration");
    const std::size_t lags = static_cast<std::size_t>(std::floor(max_lag / trajectory.dt + 1e-9)) + 1;

    const std::size_t m = std::bit_ceil(2 * n);
    auto buf = fftw_buffer<double>(m);
    auto spec = fftw_buffer<fftw_complex>(m / 2 + 1);
    const double mean = mean_of(trajectory.samples);
    for (std::size_t i = 0; i < m; ++i)
        buf[i] = i < n ? trajectory.samples[i] - mean : 0.0;
    {
        const Plan forward = plan_r2c(checked_fft_size(m), buf.get(), spec.get());
        forward.execute();
    }
    for (std::size_t k = 0; k <= m / 2; ++k) {
        spec[k][0] = spec[k][0] * spec[k][0] + spec[k][1] * spec[k][1];
        spec[k][1] = 0.0;
    }
    {
        const Plan backward = plan_c2r(checked_fft_size(m), spec.get(), buf.get());
        backward.execute();
    }

    CorrelationTable table;
    table.lags.resize(lags);
    table.values.resize(lags);
    const double scale = 1.0 / (static_cast<double>(m) * static_cast<double>(n));
    for (std::size_t j = 0; j < lags; ++j) {
        table.lags[j] = static_cast<double>(j) * trajectory.dt;
        table.values[j] = buf[j] * scale;
    }
    return table;
}

TabulatedPsd read_psd_csv(const std::filesystem::path& path)
{
    const io::CsvTable csv = io::parse_csv(io::read_file(path));
    if (csv.header.size() != 2)
        throw InputError(path.string() + ": PSD CSV must have exactly two columns (omega_rad_s, S_rad2_s)");
    TabulatedPsd t;
    for (const auto& row : csv.rows) {
        t.omega.push_back(io::parse_double(row[0], "omega"));
        t.value.push_back(io::parse_double(row[1], "PSD value"));
    }
    validate_component(t);
    return t;
}

void write_psd_csv(const std::filesystem::path& path, const TabulatedPsd& table)
{
    std::string text = "omega_rad_s,S_rad2_s\n";
    for (std::size_t i = 0; i < table.omega.size(); ++i)
        text += io::csv_line({io::format_double(table.omega[i]), io::format_double(table.value[i])});
    io::write_file_atomic(path, text);
}

} // namespace spinlock
