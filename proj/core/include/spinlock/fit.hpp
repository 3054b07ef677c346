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
#include <span>
#include <string>

namespace spinlock {

enum class DecayModel { Exponential, DampedCosine };

struct DecayFit {
    DecayModel model = DecayModel::Exponential;
    bool success = false;
    std::string message;

    double rate = 0.0;         ///< r, 1/s
    double rate_se = 0.0;
    double beta = 0.0;         ///< modulation index, damped cosine only
    double beta_se = 0.0;
    double amplitude = 1.0;
    double amplitude_se = 0.0;

    double chi2 = 0.0;
    std::size_t dof = 0;
    double reduced_chi2 = 0.0;

    bool rate_clamped = false;   ///< unconstrained optimum had r < 0; reported as 0
    bool beta_fallback = false;  ///< beta indistinguishable from 0; exponential result returned
};

struct ExponentialFitOptions {
    bool fit_amplitude = false;
    double amplitude = 1.0;  ///< used when the amplitude is fixed
};

/// Weighted least squares of y = A exp(-r t). Needs >= 3 points and positive errors
/// (InputError otherwise). Standard errors from the inverse normal matrix.
DecayFit fit_exponential(std::span<const double> t, std::span<const double> y, std::span<const double> err,
                         ExponentialFitOptions options = {});

struct DampedCosineOptions {
    bool fit_amplitude = false;
    double amplitude = 1.0;
    bool force_beta_zero = false;   ///< reduce to fit_exponential
    std::size_t beta_starts = 64;   ///< multi-start grid over beta Omega t_max / 2
    double min_chi2_gain = 4.0;     ///< chi2 improvement over the exponential needed to keep beta
    double min_phase = kPi;         ///< beta Omega t_max / 2 needed to keep beta
};

/// Weighted least squares of y = A cos(beta Omega t / 2) exp(-r t) over (beta, r).
/// Needs >= 6 points. Falls back to the exponential fit (beta_fallback) when beta is
/// below twice its standard error, the chi2 gain is below min_chi2_gain or the
/// oscillation does not reach min_phase within the data. Solutions above
/// the sampling Nyquist limit (beta Omega / 2 >= pi / spacing) are rejected.
DecayFit fit_damped_cosine(std::span<const double> t, std::span<const double> y, std::span<const double> err,
                           double rabi, DampedCosineOptions options = {});

/// Peak frequency deviation beta Omega / (2 pi) in Hz of phi = beta cos(Omega t).
double frequency_modulation_depth(double beta, double rabi);

struct CoherentPhaseFit {
    bool success = false;
    std::string message;
    double beta = 0.0;
    double beta_se = 0.0;
    double delta = 0.0;   ///< wrapped to (-pi, pi]
    double delta_se = 0.0;
    double chi2 = 0.0;
};

/// Joint fit of sy = sin(beta Omega t/2) sin(Omega t + delta), sz = -sin(beta Omega t/2) cos(Omega t + delta)
/// (drive frame) over (beta, delta).
CoherentPhaseFit fit_coherent_phase(std::span<const double> t, std::span<const double> sy,
                                    std::span<const double> sz, std::span<const double> err, double rabi);

} // namespace spinlock
