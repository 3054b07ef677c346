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

#include "spinlock/motion.hpp"

#include "spinlock/io.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace spinlock {

namespace {

void check_eta(double eta)
{
    if (!(eta > 0.0 && eta < 1.0))
        throw InputError("Lamb-Dicke parameter must satisfy 0 < eta < 1");
}

void check_order(int s)
{
    if (s != 0 && s != 1)
        throw InputError("sideband order must be 0 (carrier) or 1 (blue sideband)");
}

void check_nbar(double nbar)
{
    if (!(nbar >= 0.0) || !std::isfinite(nbar))
        throw InputError("mean phonon number must be finite and >= 0");
}

struct Moments {
    double mean = 0.0;
    double spread = 0.0;
};

Moments sideband_moments(double eta, double nbar)
{
    check_eta(eta);
    check_nbar(nbar);
    const std::size_t cutoff = default_cutoff(nbar);
    const auto p = coherent_fock_distribution(nbar, cutoff);
    const auto w = relative_couplings(eta, cutoff, 1);
    std::vector<double> terms(p.size());
    for (std::size_t n = 0; n < p.size(); ++n)
        terms[n] = p[n] * w[n];
    const double total = pairwise_sum(p);
    Moments m;
    m.mean = pairwise_sum(terms) / total;
    for (std::size_t n = 0; n < p.size(); ++n)
        terms[n] = p[n] * (w[n] - m.mean) * (w[n] - m.mean);
    m.spread = std::sqrt(std::max(0.0, pairwise_sum(terms) / total));
    return m;
}

} // namespace

void MotionalMode::validate() const
{
    check_eta(lamb_dicke);
    if (!(frequency > 0.0) || !std::isfinite(frequency))
        throw InputError("mode frequency must be positive");
}

std::vector<double> relative_couplings(double eta, std::size_t n_max, int s)
{
    check_eta(eta);
    check_order(s);
    // extended precision keeps the recurrence accurate near Laguerre zeros at large n
    using real = long double;
    const real x = static_cast<real>(eta) * static_cast<real>(eta);
    const real alpha = static_cast<real>(s);
    std::vector<double> out(n_max + 1);
    real prev = 0.0L;
    real cur = 1.0L;
    for (std::size_t n = 0; n <= n_max; ++n) {
        if (n == 1) {
            prev = cur;
            cur = 1.0L + alpha - x;
        }
        else if (n > 1) {
            const real k = static_cast<real>(n - 1);
            const real next = ((2.0L * k + 1.0L + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0L);
            prev = cur;
            cur = next;
        }
        out[n] = static_cast<double>(s == 0 ? cur : static_cast<real>(eta) * cur / std::sqrt(static_cast<real>(n) + 1.0L));
    }
    return out;
}

double relative_coupling(double eta, std::size_t n, int s)
{
    return relative_couplings(eta, n, s).back();
}

double fock_matrix_element(double eta, std::size_t n, int s)
{
    return std::exp(-0.5 * eta * eta) * std::abs(relative_coupling(eta, n, s));
}

double poisson_tail(double nbar, std::size_t cutoff)
{
    check_nbar(nbar);
    if (nbar == 0.0)
        return 0.0;
    return boost::math::gamma_p(static_cast<double>(cutoff) + 1.0, nbar);
}

std::size_t default_cutoff(double nbar)
{
    check_nbar(nbar);
    const double width = std::sqrt(nbar) + 1.0;
    auto k = static_cast<std::size_t>(std::ceil(nbar + 6.0 * width + 10.0));
    while (poisson_tail(nbar, k) >= kPoissonTailBound)
        k += static_cast<std::size_t>(std::ceil(width));
    return k;
}

std::vector<double> coherent_fock_distribution(double nbar, std::size_t cutoff)
{
    check_nbar(nbar);
    const double tail = poisson_tail(nbar, cutoff);
    if (tail >= kPoissonTailBound)
        throw InputError("Fock cutoff " + std::to_string(cutoff) + " too small for nbar = " + io::format_double(nbar) +
                         ": tail mass " + io::format_double(tail) + " >= 1e-12");
    std::vector<double> p(cutoff + 1, 0.0);
    if (nbar == 0.0) {
        p[0] = 1.0;
        return p;
    }
    const double log_nbar = std::log(nbar);
    for (std::size_t n = 0; n <= cutoff; ++n) {
        const double dn = static_cast<double>(n);
        p[n] = std::exp(-nbar + dn * log_nbar - std::lgamma(dn + 1.0));
    }
    return p;
}

double average_sideband_rabi(double eta, double nbar) { return sideband_moments(eta, nbar).mean; }

double rabi_spread(double eta, double nbar) { return sideband_moments(eta, nbar).spread; }

DisplacementOptimum optimal_displacement(double eta, OptimumOptions options)
{
    if (!(eta > 0.0 && eta < 0.5))
        throw InputError("optimal displacement needs 0 < eta < 0.5");
    const double lo = options.nbar_min;
    const double hi = options.nbar_max > 0.0 ? options.nbar_max : 10.0 / (eta * eta);
    if (!(lo > 0.0) || !(hi > lo) || options.scan_points < 3)
        throw InputError("optimum search needs 0 < nbar_min < nbar_max and >= 3 scan points");

    const std::size_t m = options.scan_points;
    std::vector<double> grid(m), values(m);
    for (std::size_t i = 0; i < m; ++i) {
        grid[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(m - 1));
        values[i] = average_sideband_rabi(eta, grid[i]);
    }
    const auto best = static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
    if (best == 0 || best == m - 1)
        throw SearchError("no interior maximum of the average sideband coupling for eta = " + io::format_double(eta) +
                          " in nbar range [" + io::format_double(lo) + ", " + io::format_double(hi) + "]");

    auto neg = [&](double nbar) { return -average_sideband_rabi(eta, nbar); };
    const auto [arg, val] = boost::math::tools::brent_find_minima(neg, grid[best - 1], grid[best + 1], 24);
    DisplacementOptimum out;
    out.eta = eta;
    out.nbar = arg;
    out.relative_rabi = -val;
    out.spread = rabi_spread(eta, arg);
    return out;
}

double sideband_excitation_probability(double eta, double nbar, double rabi_00, double pulse)
{
    const double omega = rabi_00 * average_sideband_rabi(eta, nbar);
    const double s = std::sin(0.5 * omega * pulse);
    return s * s;
}

double fit_sideband_rabi(std::span<const double> pulses, std::span<const double> probabilities, double omega_max)
{
    if (pulses.size() != probabilities.size() || pulses.size() < 3)
        throw InputError("sideband Rabi fit needs >= 3 (pulse, probability) pairs of equal length");
    std::vector<double> t(pulses.begin(), pulses.end());
    std::sort(t.begin(), t.end());
    double spacing = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < t.size(); ++i)
        if (t[i] > t[i - 1])
            spacing = std::min(spacing, t[i] - t[i - 1]);
    const double t_max = t.back();
    if (!std::isfinite(spacing) || !(t_max > 0.0))
        throw InputError("sideband Rabi fit needs distinct positive pulse durations");
    if (!(omega_max > 0.0))
        omega_max = kPi / spacing;

    auto sse = [&](double omega) {
        double acc = 0.0;
        for (std::size_t i = 0; i < pulses.size(); ++i) {
            const double s = std::sin(0.5 * omega * pulses[i]);
            const double r = s * s - probabilities[i];
            acc += r * r;
        }
        return acc;
    };
    const double step = 0.25 * kPi / t_max;
    const auto n = static_cast<std::size_t>(std::ceil(omega_max / step));
    std::size_t best = 1;
    double best_val = sse(step);
    for (std::size_t i = 2; i <= n; ++i) {
        const double v = sse(step * static_cast<double>(i));
        if (v < best_val) {
            best_val = v;
            best = i;
        }
    }
    const double a = step * static_cast<double>(best - 1);
    const double b = step * static_cast<double>(best + 1);
    return boost::math::tools::brent_find_minima(sse, std::max(a, 1e-12 * step), b, 50).first;
}

CouplingTable coupling_table(double eta, std::size_t n_max)
{
    CouplingTable t;
    t.eta = eta;
    t.carrier = relative_couplings(eta, n_max, 0);
    t.blue_sideband = relative_couplings(eta, n_max, 1);
    return t;
}

std::string coupling_csv(const CouplingTable& table)
{
    std::string out = "n,carrier,blue_sideband\n";
    for (std::size_t n = 0; n < table.size(); ++n)
        out += io::csv_line({std::to_string(n), io::format_double(table.carrier[n]),
                             io::format_double(table.blue_sideband[n])});
    return out;
}

void write_coupling_csv(const std::filesystem::path& path, const CouplingTable& table)
{
    io::write_file_atomic(path, coupling_csv(table));
}

} // namespace spinlock
