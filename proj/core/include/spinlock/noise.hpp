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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace spinlock {

// Spectral densities are two-sided and take angular frequency (rad/s):
//   C(tau) = (1/2pi) int_{-inf}^{inf} S(w) e^{i w tau} dw,   var = (1/pi) int_0^inf S(w) dw.
// A one-sided density in the same units is 2 S(w) for w > 0.

/// Lorentzian line centred at +-center (rad/s). `height` is S at the centre, `full_width` the FWHM.
struct LorentzianPeak {
    double center = 0.0;
    double height = 0.0;
    double full_width = 0.0;
};

/// Power law + white floor + Lorentzian lines:
///   S(w) = A |w/w_ref|^k [w in band] + floor + sum_p L_p(|w|).
struct ParametricPsd {
    double background_amplitude = 0.0;  ///< rad^2 s at w_ref
    double background_exponent = 0.0;
    double reference_frequency = 1.0;   ///< rad/s
    /// Optional [low, high] in rad/s outside which the power-law term is zero.
    std::optional<std::pair<double, double>> background_band;
    double white_floor = 0.0;
    std::vector<LorentzianPeak> peaks;
};

/// Tabulated S(w) on w >= 0, log-log interpolated, constant beyond the ends.
struct TabulatedPsd {
    std::vector<double> omega;
    std::vector<double> value;
};

using PsdComponent = std::variant<ParametricPsd, TabulatedPsd>;

/// Sum of independent spectral components. An empty model is identically zero.
class PsdModel {
public:
    PsdModel() = default;
    explicit PsdModel(PsdComponent component);
    explicit PsdModel(std::vector<PsdComponent> components);

    static PsdModel white(double floor);
    /// Single power law; `band` restricts it to [low, high].
    static PsdModel power_law(double amplitude, double exponent, double reference,
                              std::optional<std::pair<double, double>> band = std::nullopt);

    const std::vector<PsdComponent>& components() const noexcept { return components_; }
    bool is_zero() const noexcept;

    /// Model of two independent noise sources acting together.
    friend PsdModel operator+(const PsdModel& a, const PsdModel& b);
    /// Model scaled by a non-negative factor.
    PsdModel scaled(double factor) const;

    /// Throws InputError if any component violates its invariants.
    void validate() const;

private:
    std::vector<PsdComponent> components_;
};

struct PsdSample {
    double value = 0.0;
    bool extrapolated = false;  ///< a tabulated component was evaluated outside its grid
};

/// S(w). Throws DomainError for w == 0 with a negative power-law exponent.
PsdSample sample_psd(const PsdModel& model, double omega);
double evaluate_psd(const PsdModel& model, double omega);

enum class PsdDirection { PhaseToFrequency, FrequencyToPhase };

/// S_nu(w) = w^2 S_phi(w) and its inverse.
double convert_psd(double value, double omega, PsdDirection direction);

struct NoiseTrajectory {
    double dt = 0.0;
    std::vector<double> samples;
    std::uint64_t seed = 0;

    double duration() const noexcept { return dt * static_cast<double>(samples.size()); }
};

/// Coherent modulation phi(t) = sum_k beta_k cos(w_k t + delta_k).
struct ModulationTone {
    double omega = 0.0;
    double beta = 0.0;
    double phase = 0.0;
};

struct ModulationSpec {
    std::vector<ModulationTone> tones;

    bool empty() const noexcept { return tones.empty(); }
    void validate() const;
};

double sample_modulation(const ModulationSpec& spec, double t);

struct CorrelationTable {
    std::vector<double> lags;
    std::vector<double> values;
};

/// Gaussian zero-mean trajectory with two-sided PSD `model`, sampled every dt for
/// floor(duration/dt) + 1 samples. Spectral coloring on an FFT grid of M >= 2N points
/// (grid spacing <= pi/duration); DC bin zero. Deterministic in all arguments.
NoiseTrajectory synthesize_trajectory(const PsdModel& model, double duration, double dt, std::uint64_t seed);

/// Lowest and highest angular frequencies represented by synthesize_trajectory.
std::pair<double, double> synthesis_band(double duration, double dt);

/// Mean-removed averaged periodogram, two-sided, on w_k = 2 pi k / (N dt), k = 0..N/2.
TabulatedPsd estimate_psd(std::span<const NoiseTrajectory> trajectories);

/// Biased sample autocovariance at lags 0, dt, ..., floor(max_lag/dt) dt.
CorrelationTable autocorrelation(const NoiseTrajectory& trajectory, double max_lag);

/// Two-column CSV "omega_rad_s,S_rad2_s".
TabulatedPsd read_psd_csv(const std::filesystem::path& path);
void write_psd_csv(const std::filesystem::path& path, const TabulatedPsd& table);

} // namespace spinlock
