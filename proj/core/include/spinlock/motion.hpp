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

#include "spinlock/common.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace spinlock {

/// A motional mode of the trapped ion.
struct MotionalMode {
    double frequency = 0.0;      ///< nu, rad/s
    double lamb_dicke = 0.0;     ///< eta
    std::size_t fock_cutoff = 0; ///< 0 selects default_cutoff per coherent state

    /// Throws InputError unless 0 < eta < 1 and nu > 0.
    void validate() const;
};

/// The optimum search found no interior maximum inside its scan range.
class SearchError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Largest tail mass P(n > cutoff) accepted for a truncated Poisson table.
inline constexpr double kPoissonTailBound = 1e-12;

/// |<n+s| exp(i eta (a + a^dag)) |n>| = e^{-eta^2/2} eta^s sqrt(n!/(n+s)!) |L_n^(s)(eta^2)|, s in {0, 1}.
double fock_matrix_element(double eta, std::size_t n, int s);

/// Coupling of |n> -> |n+s> relative to the ground-state carrier Omega_00: the element above
/// divided by e^{-eta^2/2}, keeping the sign of the Laguerre polynomial.
double relative_coupling(double eta, std::size_t n, int s);

/// Relative couplings for n = 0..n_max in one recurrence pass.
std::vector<double> relative_couplings(double eta, std::size_t n_max, int s);

/// Smallest cutoff with P(n > cutoff) < kPoissonTailBound for mean nbar.
std::size_t default_cutoff(double nbar);

/// Poisson weights p_0..p_cutoff. Throws InputError if the tail mass beyond `cutoff`
/// exceeds kPoissonTailBound or nbar < 0.
std::vector<double> coherent_fock_distribution(double nbar, std::size_t cutoff);

/// P(n > cutoff) for a Poisson distribution with mean nbar.
double poisson_tail(double nbar, std::size_t cutoff);

/// sum_n p_n(nbar) Omega_{n,n+1} / Omega_00.
double average_sideband_rabi(double eta, double nbar);

/// sqrt(sum p_n w_n^2 - (sum p_n w_n)^2) of the relative blue-sideband couplings.
double rabi_spread(double eta, double nbar);

struct OptimumOptions {
    double nbar_min = 1.0;
    double nbar_max = 0.0;  ///< 0 selects 10 / eta^2
    std::size_t scan_points = 64;
};

struct DisplacementOptimum {
    double eta = 0.0;
    double nbar = 0.0;
    double relative_rabi = 0.0;
    double spread = 0.0;
};

/// argmax over nbar of average_sideband_rabi: log-spaced scan, then Brent refinement
/// to |d nbar| <= 1e-3 nbar. Throws SearchError when the scan maximum is at a range end.
DisplacementOptimum optimal_displacement(double eta, OptimumOptions options = {});

/// sin^2(Omega_BSB t_p / 2) with Omega_BSB = rabi_00 * average_sideband_rabi(eta, nbar).
double sideband_excitation_probability(double eta, double nbar, double rabi_00, double pulse);

/// Least-squares Omega_BSB (rad/s) from excitation probabilities sampled at pulse durations.
/// The search covers (0, omega_max] with omega_max defaulting to pi / (smallest pulse spacing).
double fit_sideband_rabi(std::span<const double> pulses, std::span<const double> probabilities,
                         double omega_max = 0.0);

struct CouplingTable {
    double eta = 0.0;
    std::vector<double> carrier;        ///< Omega_{n,n} / Omega_00
    std::vector<double> blue_sideband;  ///< Omega_{n,n+1} / Omega_00

    std::size_t size() const noexcept { return carrier.size(); }
};

CouplingTable coupling_table(double eta, std::size_t n_max);

/// CSV with columns n,carrier,blue_sideband.
std::string coupling_csv(const CouplingTable& table);
void write_coupling_csv(const std::filesystem::path& path, const CouplingTable& table);

} // namespace spinlock
