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

#include "spinlock/dynamics.hpp"
#include "spinlock/fit.hpp"
#include "spinlock/motion.hpp"
#include "spinlock/noise.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spinlock {

enum class Transition { Carrier, BlueSideband };

/// Row flags of scan and spectrum tables.
enum ScanFlag : unsigned {
    kFlagWeakNoise = 1u << 0,    ///< outside the weak-noise limit
    kFlagStrongPhase = 1u << 1,  ///< some trajectory had |phi| > 0.3 rad
    kFlagRabiSpread = 1u << 2,   ///< sideband Rabi-frequency spread >= 1e-3
    kFlagBelowFloor = 1u << 3,   ///< S_nu <= Gamma
    kFlagRateClamped = 1u << 4,
    kFlagBetaFallback = 1u << 5,
};

/// "ok" or names joined by '|'.
std::string format_flags(unsigned flags);
unsigned parse_flags(std::string_view text);

struct MotionConfig {
    MotionalMode mode;
    double nbar = 0.0;
    PsdModel motional_noise;  ///< phase noise present only on the sideband transition
};

struct ProtocolConfig {
    Transition transition = Transition::Carrier;
    /// Locking Rabi frequencies (rad/s); carrier Omega_00 for sideband runs. Strictly increasing.
    std::vector<double> rabi;
    /// Either one shared time grid or one grid per Rabi frequency (s).
    std::vector<std::vector<double>> times;
    std::size_t shots = 150;
    std::size_t trajectories = 100;
    double step_factor = 0.01;  ///< Omega dt of the propagation
    PsdModel noise;
    ModulationSpec modulation;
    std::optional<MotionConfig> motion;
    std::uint64_t seed = 0;
    unsigned threads = 1;

    void validate() const;
    std::span<const double> times_for(std::size_t index) const;
};

struct ScanPoint {
    double omega = 0.0;  ///< effective locking Rabi frequency, rad/s
    double t = 0.0;
    double sx_mean = 0.0;
    double sx_stderr = 0.0;
    std::size_t shots = 0;
    unsigned flags = 0;
};

struct ScanDataset {
    std::vector<ScanPoint> rows;
    double rabi_scale = 1.0;   ///< Omega_eff / Omega for the chosen transition
    double rabi_spread = 0.0;  ///< sideband spread in units of Omega_00
    std::vector<std::string> warnings;
};

/// Ideal pi/2 preparation along +x, ensemble-averaged locking evolution, ideal analysis
/// pulse, binomial shots with p = (1 + <sx>)/2. Deterministic in config.seed; independent
/// of config.threads.
ScanDataset simulate_protocol(const ProtocolConfig& config);

std::string scan_csv(const ScanDataset& data);
void write_scan_csv(const std::filesystem::path& path, const ScanDataset& data);
/// Throws InputError for a missing, malformed or empty file.
ScanDataset read_scan_csv(const std::filesystem::path& path);

struct WeakNoiseReport {
    bool ok = true;
    double rms_phase = 0.0;       ///< sqrt((1/pi) int_{Omega/2}^{2 Omega} S dw), rad
    double decay_exponent = 0.0;  ///< Omega^2 S(Omega) t_max / 2
    std::string diagnostic;
};

inline constexpr double kWeakNoiseRmsLimit = 0.3;
inline constexpr double kWeakNoiseExponentLimit = 5.0;

WeakNoiseReport weak_noise_check(double rabi, const PsdModel& model, double t_max);

struct DetectionFloor {
    double gamma = 0.9;  ///< upper-state decay rate, 1/s

    double limit() const noexcept { return gamma; }
    bool flags(double s_nu) const noexcept { return s_nu <= gamma; }
};

enum class FitChoice { Exponential, DampedCosine };

struct OmegaFit {
    double omega = 0.0;
    DecayFit fit;
    unsigned flags = 0;  ///< union of the scan-row flags plus fit flags
};

/// Fits every Rabi-frequency block of a scan.
std::vector<OmegaFit> fit_scan(const ScanDataset& data, FitChoice choice, DampedCosineOptions options = {});

struct SpectrumRow {
    double omega = 0.0;
    double rate = 0.0;
    double rate_se = 0.0;
    double s_phi = 0.0;      ///< S_nu / Omega^2, rad^2 s
    double s_phi_err = 0.0;
    double s_nu = 0.0;       ///< 2 rate, 1/s
    double s_nu_err = 0.0;
    double beta = 0.0;
    double beta_se = 0.0;
    double delta_nu = 0.0;   ///< Hz; NaN without a coherent component
    unsigned flags = 0;
};

struct SpectrumEstimate {
    std::vector<SpectrumRow> rows;
};

/// S_phi = 2 rate / Omega^2 and S_nu = Omega^2 S_phi with linear error propagation.
/// Throws NumericalError if any fit failed.
SpectrumEstimate reconstruct_spectrum(std::span<const OmegaFit> fits, DetectionFloor floor = {});

std::string spectrum_csv(const SpectrumEstimate& spectrum);
void write_spectrum_csv(const std::filesystem::path& path, const SpectrumEstimate& spectrum);

} // namespace spinlock
