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

#include "spinlock/fit.hpp"

#include "spinlock/common.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/LevenbergMarquardt>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace spinlock {

namespace {

using GradRef = Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>>;

// Model value at sample i and its gradient with respect to the parameters.
using ModelFn = std::function<double(std::size_t i, const Eigen::VectorXd& p, GradRef grad)>;

struct Problem : Eigen::DenseFunctor<double> {
    Problem(std::span<const double> y, std::span<const double> err, ModelFn model, int n_params)
        : Eigen::DenseFunctor<double>(n_params, static_cast<int>(y.size())), y_(y), err_(err),
          model_(std::move(model))
    {
    }

    int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& r) const
    {
        Eigen::RowVectorXd g(p.size());
        for (std::size_t i = 0; i < y_.size(); ++i)
            r(static_cast<Eigen::Index>(i)) = (model_(i, p, g) - y_[i]) / err_[i];
        return 0;
    }

    int df(const Eigen::VectorXd& p, Eigen::MatrixXd& jac) const
    {
        for (std::size_t i = 0; i < y_.size(); ++i) {
            GradRef row = jac.row(static_cast<Eigen::Index>(i));
            model_(i, p, row);
            row /= err_[i];
        }
        return 0;
    }

    std::span<const double> y_, err_;
    ModelFn model_;
};

struct Solution {
    Eigen::VectorXd p;
    Eigen::VectorXd se;
    double chi2 = 0.0;
    bool converged = false;
    std::string message;
};

Solution solve(Problem& problem, Eigen::VectorXd start)
{
    Eigen::LevenbergMarquardt<Problem> lm(problem);
    lm.setXtol(1e-14);
    lm.setFtol(1e-14);
    lm.setGtol(0.0);
    lm.setMaxfev(2000);
    const auto status = lm.minimize(start);

    Solution s;
    s.p = start;
    Eigen::VectorXd r(problem.values());
    problem(start, r);
    s.chi2 = r.squaredNorm();
    Eigen::MatrixXd jac(problem.values(), problem.inputs());
    problem.df(start, jac);
    const Eigen::MatrixXd normal = jac.transpose() * jac;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(normal);
    s.se = Eigen::VectorXd::Constant(start.size(), std::numeric_limits<double>::infinity());
    if (lu.isInvertible()) {
        const Eigen::MatrixXd cov = lu.inverse();
        for (Eigen::Index k = 0; k < start.size(); ++k)
            s.se(k) = std::sqrt(std::max(0.0, cov(k, k)));
    }
    s.converged = status != Eigen::LevenbergMarquardtSpace::ImproperInputParameters &&
                  status != Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation &&
                  s.p.allFinite() && std::isfinite(s.chi2);
    if (!s.converged)
        s.message = "least-squares did not converge (status " + std::to_string(static_cast<int>(status)) + ")";
    return s;
}

void check_inputs(std::span<const double> t, std::span<const double> y, std::span<const double> err,
                  std::size_t min_points)
{
    if (t.size() != y.size() || t.size() != err.size())
        throw InputError("fit inputs must have equal lengths");
    if (t.size() < min_points)
        throw InputError("fit needs at least " + std::to_string(min_points) + " points");
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!std::isfinite(t[i]) || !std::isfinite(y[i]))
            throw InputError("fit inputs must be finite");
        if (!(err[i] > 0.0) || !std::isfinite(err[i]))
            throw InputError("fit errors must be positive and finite");
    }
}

double initial_rate(std::span<const double> t, std::span<const double> y, double amplitude)
{
    std::vector<double> est;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] > 0.0) {
            const double ratio = std::clamp(y[i] / amplitude, 1e-3, 1.0);
            est.push_back(-std::log(ratio) / t[i]);
        }
    }
    if (est.empty())
        return 0.0;
    std::nth_element(est.begin(), est.begin() + static_cast<std::ptrdiff_t>(est.size() / 2), est.end());
    return est[est.size() / 2];
}

void finish(DecayFit& fit, std::size_t n_points, std::size_t n_params)
{
    fit.dof = n_points > n_params ? n_points - n_params : 0;
    fit.reduced_chi2 = fit.dof > 0 ? fit.chi2 / static_cast<double>(fit.dof) : 0.0;
    if (fit.rate < 0.0) {
        fit.rate = 0.0;
        fit.rate_clamped = true;
    }
}

} // namespace

DecayFit fit_exponential(std::span<const double> t, std::span<const double> y, std::span<const double> err,
                         ExponentialFitOptions options)
{
    check_inputs(t, y, err, 3);
    const bool free_amp = options.fit_amplitude;
    const double fixed_amp = options.amplitude;
    ModelFn model = [t, free_amp, fixed_amp](std::size_t i, const Eigen::VectorXd& p,
                                             GradRef g) {
        const double x = t[i];
        const double a = free_amp ? p(1) : fixed_amp;
        const double e = std::exp(-p(0) * x);
        g(0) = -x * a * e;
        if (free_amp)
            g(1) = e;
        return a * e;
    };
    const int n_params = free_amp ? 2 : 1;
    Problem problem(y, err, model, n_params);
    Eigen::VectorXd start(n_params);
    start(0) = initial_rate(t, y, free_amp ? std::max(y[0], 1e-3) : fixed_amp);
    if (free_amp)
        start(1) = std::max(y[0], 1e-3);
    const Solution s = solve(problem, start);

    DecayFit fit;
    fit.model = DecayModel::Exponential;
    fit.success = s.converged;
    fit.message = s.message;
    fit.rate = s.p(0);
    fit.rate_se = s.se(0);
    fit.amplitude = free_amp ? s.p(1) : fixed_amp;
    fit.amplitude_se = free_amp ? s.se(1) : 0.0;
    fit.chi2 = s.chi2;
    finish(fit, t.size(), static_cast<std::size_t>(n_params));
    return fit;
}

DecayFit fit_damped_cosine(std::span<const double> t, std::span<const double> y, std::span<const double> err,
                           double rabi, DampedCosineOptions options)
{
    check_inputs(t, y, err, 6);
    if (!(rabi > 0.0))
        throw InputError("damped-cosine fit needs a positive Rabi frequency");

    ExponentialFitOptions exp_opts;
    exp_opts.fit_amplitude = options.fit_amplitude;
    exp_opts.amplitude = options.amplitude;
    DecayFit exp_fit = fit_exponential(t, y, err, exp_opts);
    if (options.force_beta_zero)
        return exp_fit;

    const bool free_amp = options.fit_amplitude;
    const double fixed_amp = options.amplitude;
    const double half_omega = 0.5 * rabi;
    ModelFn model = [=](std::size_t i, const Eigen::VectorXd& p, GradRef g) {
        const double x = t[i];
        const double a = free_amp ? p(2) : fixed_amp;
        const double phase = p(0) * half_omega * x;
        const double e = std::exp(-p(1) * x);
        const double c = std::cos(phase);
        g(0) = -a * half_omega * x * std::sin(phase) * e;
        g(1) = -x * a * c * e;
        if (free_amp)
            g(2) = c * e;
        return a * c * e;
    };
    const int n_params = free_amp ? 3 : 2;
    Problem problem(y, err, model, n_params);

    const double t_max = *std::max_element(t.begin(), t.end());
    std::vector<double> sorted(t.begin(), t.end());
    std::sort(sorted.begin(), sorted.end());
    double spacing = t_max;
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i] > sorted[i - 1])
            spacing = std::min(spacing, sorted[i] - sorted[i - 1]);
    // Oscillations faster than the sampling Nyquist frequency are aliases.
    const double beta_max = 2.0 * kPi / (spacing * rabi);
    const double theta_max = std::min(0.5 * static_cast<double>(t.size()), 40.0) * kPi;
    const std::size_t starts = std::max<std::size_t>(options.beta_starts, 2);
    Solution best;
    best.chi2 = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < starts; ++k) {
        const double theta = theta_max * static_cast<double>(k + 1) / static_cast<double>(starts);
        Eigen::VectorXd start(n_params);
        start(0) = theta / (half_omega * t_max);
        start(1) = std::max(0.0, exp_fit.rate);
        if (free_amp)
            start(2) = exp_fit.amplitude;
        Solution s = solve(problem, start);
        if (s.converged && std::abs(s.p(0)) < beta_max && s.chi2 < best.chi2)
            best = std::move(s);
    }

    if (!std::isfinite(best.chi2)) {
        DecayFit failed = exp_fit;
        failed.model = DecayModel::DampedCosine;
        failed.success = false;
        failed.message = "damped-cosine fit did not converge from any start";
        return failed;
    }

    const double beta = std::abs(best.p(0));
    const double beta_se = best.se(0);
    const bool degenerate = !std::isfinite(beta_se) || beta < 2.0 * beta_se ||
                            exp_fit.chi2 - best.chi2 < options.min_chi2_gain ||
                            beta * half_omega * t_max < options.min_phase;
    if (degenerate && exp_fit.success) {
        exp_fit.beta_fallback = true;
        return exp_fit;
    }

    DecayFit fit;
    fit.model = DecayModel::DampedCosine;
    fit.success = best.converged;
    fit.message = best.message;
    fit.beta = beta;
    fit.beta_se = beta_se;
    fit.rate = best.p(1);
    fit.rate_se = best.se(1);
    fit.amplitude = free_amp ? best.p(2) : fixed_amp;
    fit.amplitude_se = free_amp ? best.se(2) : 0.0;
    fit.chi2 = best.chi2;
    finish(fit, t.size(), static_cast<std::size_t>(n_params));
    return fit;
}

double frequency_modulation_depth(double beta, double rabi)
{
    if (!(beta >= 0.0))
        throw InputError("modulation index must be >= 0");
    return beta * rabi / kTwoPi;
}

CoherentPhaseFit fit_coherent_phase(std::span<const double> t, std::span<const double> sy,
                                    std::span<const double> sz, std::span<const double> err, double rabi)
{
    check_inputs(t, sy, err, 3);
    check_inputs(t, sz, err, 3);
    if (!(rabi > 0.0))
        throw InputError("coherent phase fit needs a positive Rabi frequency");

    // Stacked data: index i < n is sy(t_i), i >= n is sz(t_{i-n}).
    const std::size_t n = t.size();
    std::vector<double> yy(2 * n), ee(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        yy[i] = sy[i];
        yy[n + i] = sz[i];
        ee[i] = ee[n + i] = err[i];
    }
    ModelFn model = [t, n, rabi](std::size_t i, const Eigen::VectorXd& p, GradRef g) {
        const bool z_block = i >= n;
        const double time = t[z_block ? i - n : i];
        const double env_phase = 0.5 * p(0) * rabi * time;
        const double env = std::sin(env_phase);
        const double denv = 0.5 * rabi * time * std::cos(env_phase);
        const double arg = rabi * time + p(1);
        if (z_block) {
            g(0) = -denv * std::cos(arg);
            g(1) = env * std::sin(arg);
            return -env * std::cos(arg);
        }
        g(0) = denv * std::sin(arg);
        g(1) = env * std::cos(arg);
        return env * std::sin(arg);
    };
    Problem problem(yy, ee, model, 2);

    CoherentPhaseFit out;
    out.chi2 = std::numeric_limits<double>::infinity();
    const double t_max = *std::max_element(t.begin(), t.end());
    for (int kb = 1; kb <= 12; ++kb) {
        for (int kd = 0; kd < 8; ++kd) {
            Eigen::VectorXd start(2);
            start(0) = (kPi * kb / 6.0) / (0.5 * rabi * t_max);
            start(1) = -kPi + kTwoPi * kd / 8.0;
            const Solution s = solve(problem, start);
            if (s.converged && s.chi2 < out.chi2) {
                out.chi2 = s.chi2;
                out.beta = s.p(0);
                out.beta_se = s.se(0);
                out.delta = s.p(1);
                out.delta_se = s.se(1);
                out.success = true;
            }
        }
    }
    if (!out.success) {
        out.message = "coherent phase fit did not converge";
        return out;
    }
    if (out.beta < 0.0) {
        // sin is odd in beta: (-beta, delta) equals (beta, delta + pi).
        out.beta = -out.beta;
        out.delta += kPi;
    }
    out.delta = std::remainder(out.delta, kTwoPi);
    if (out.delta <= -kPi)
        out.delta += kTwoPi;
    return out;
}

} // namespace spinlock
