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

#include "spinlock/common.hpp"
#include "spinlock/dynamics.hpp"
#include "spinlock/io.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/sinc.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

namespace spinlock {

namespace {

using cd = std::complex<double>;
using Vec4 = std::array<double, 4>;  // Re J for (cc, cs, sc, ss)

constexpr cd kI(0.0, 1.0);

// Time integrals of the filter functions cos(Omega s), sin(Omega s) against e^{i w (t1 - t2)}
// over 0 <= t2 <= t1 <= t, in closed form.
class Kernel {
public:
    Kernel(double rabi, double t) : rabi_(rabi), t_(t) {}

    Vec4 operator()(double w) const
    {
        cd d[2][2];
        for (int p = 0; p < 2; ++p)
            for (int q = 0; q < 2; ++q)
                d[p][q] = double_integral(w + sign(p) * rabi_, sign(q) * rabi_ - w);
        // cos: (1/2, 1/2); sin: (-i/2, i/2) for exponents (+Omega, -Omega).
        const std::array<std::array<cd, 2>, 2> alpha{{{cd(0.5, 0.0), cd(0.5, 0.0)}, {cd(0.0, -0.5), cd(0.0, 0.5)}}};
        Vec4 out{};
        for (int f = 0; f < 2; ++f) {
            for (int g = 0; g < 2; ++g) {
                cd j = 0.0;
                for (int p = 0; p < 2; ++p)
                    for (int q = 0; q < 2; ++q)
                        j += alpha[f][p] * alpha[g][q] * d[p][q];
                out[2 * f + g] = j.real();
            }
        }
        return out;
    }

private:
    static double sign(int k) { return k == 0 ? 1.0 : -1.0; }

    // int_0^t e^{i x s} ds
    cd single(double x) const
    {
        const double h = 0.5 * x * t_;
        return t_ * std::polar(1.0, h) * boost::math::sinc_pi(h);
    }

    // int_0^t s^m e^{i a s} ds for m = 0..4
    std::array<cd, 5> moments(double a) const
    {
        std::array<cd, 5> mu{};
        const double at = a * t_;
        if (std::abs(at) < 4.0) {
            for (int m = 0; m < 5; ++m) {
                cd sum = 0.0;
                cd term = 1.0;
                for (int j = 0; j < 80; ++j) {
                    const cd add = term / static_cast<double>(m + j + 1);
                    sum += add;
                    if (std::abs(add) < 1e-18 * std::abs(sum))
                        break;
                    term *= kI * at / static_cast<double>(j + 1);
                }
                mu[m] = std::pow(t_, m + 1) * sum;
            }
            return mu;
        }
        mu[0] = single(a);
        const cd e = std::polar(1.0, at);
        for (int m = 1; m < 5; ++m)
            mu[m] = (std::pow(t_, m) * e - static_cast<double>(m) * mu[m - 1]) / (kI * a);
        return mu;
    }

    // int_0^t dt1 e^{i a t1} int_0^t1 dt2 e^{i b t2}
    cd double_integral(double a, double b) const
    {
        if (std::abs(b) * t_ >= 1e-3)
            return (single(a + b) - single(a)) / (kI * b);
        const auto mu = moments(a);
        cd sum = 0.0;
        cd ib = 1.0;
        double fact = 1.0;
        for (int k = 0; k < 4; ++k) {
            fact *= static_cast<double>(k + 1);
            sum += ib * mu[k + 1] / fact;
            ib *= kI * b;
        }
        return sum;
    }

    double rabi_;
    double t_;
};

struct Segment {
    Vec4 value{};
    double error = 0.0;
    double l1 = 0.0;
};

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 31>;
using Gauss = boost::math::quadrature::gauss<double, 15>;

template <class F>
Segment kronrod_segment(const F& f, double a, double b)
{
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    const auto& x = Kronrod::abscissa();
    const auto& wk = Kronrod::weights();
    const auto& wg = Gauss::weights();
    Vec4 k{}, g{};
    double l1 = 0.0;
    auto accumulate = [&](const Vec4& v, double weight_k, double weight_g) {
        for (int c = 0; c < 4; ++c) {
            k[c] += weight_k * v[c];
            g[c] += weight_g * v[c];
            l1 += weight_k * std::abs(v[c]);
        }
    };
    accumulate(f(mid), wk[0], wg[0]);
    for (std::size_t i = 1; i < x.size(); ++i) {
        const double wgi = (i % 2 == 0) ? wg[i / 2] : 0.0;
        accumulate(f(mid + half * x[i]), wk[i], wgi);
        accumulate(f(mid - half * x[i]), wk[i], wgi);
    }
    Segment s;
    for (int c = 0; c < 4; ++c) {
        s.value[c] = half * k[c];
        s.error = std::max(s.error, std::abs(half * (k[c] - g[c])));
    }
    s.l1 = half * l1;
    return s;
}

template <class F>
Segment adaptive(const F& f, double a, double b, double budget, int depth)
{
    Segment s = kronrod_segment(f, a, b);
    if (s.error <= budget || depth == 0 || !(b - a > 1e-14 * std::max(1.0, std::abs(b))))
        return s;
    const double m = 0.5 * (a + b);
    Segment l = adaptive(f, a, m, 0.5 * budget, depth - 1);
    Segment r = adaptive(f, m, b, 0.5 * budget, depth - 1);
    Segment out;
    for (int c = 0; c < 4; ++c)
        out.value[c] = l.value[c] + r.value[c];
    out.error = l.error + r.error;
    out.l1 = l.l1 + r.l1;
    return out;
}

bool singular_at_zero(const PsdModel& model)
{
    for (const auto& c : model.components()) {
        if (const auto* p = std::get_if<ParametricPsd>(&c)) {
            const bool reaches_zero = !p->background_band || p->background_band->first == 0.0;
            if (p->background_amplitude > 0.0 && p->background_exponent < 0.0 && reaches_zero)
                return true;
        }
    }
    return false;
}

void check_convergence(const PsdModel& model)
{
    for (const auto& c : model.components()) {
        const auto* p = std::get_if<ParametricPsd>(&c);
        if (!p || p->background_amplitude == 0.0)
            continue;
        const double k = p->background_exponent;
        const bool reaches_zero = !p->background_band || p->background_band->first == 0.0;
        const bool reaches_inf = !p->background_band;
        if (reaches_zero && k <= -1.0)
            throw NumericalError("cumulant frequency integral diverges at low frequency: power-law exponent " +
                                 io::format_double(k) + " <= -1; restrict the power law to a band");
        if (reaches_inf && k >= 1.0)
            throw NumericalError("cumulant frequency integral diverges at high frequency: power-law exponent " +
                                 io::format_double(k) + " >= 1; restrict the power law to a band");
    }
}

// int_{w0}^inf S(w) / w^2 dw
double tail_weight(const PsdModel& model, double w0)
{
    double total = 0.0;
    std::vector<PsdComponent> numeric;
    std::vector<double> u_breaks{0.0, 1.0 / w0};
    for (const auto& c : model.components()) {
        if (const auto* p = std::get_if<ParametricPsd>(&c)) {
            total += p->white_floor / w0;
            if (p->background_amplitude > 0.0) {
                const double k = p->background_exponent;
                const double lo = std::max(w0, p->background_band ? p->background_band->first : 0.0);
                const double hi = p->background_band ? p->background_band->second
                                                     : std::numeric_limits<double>::infinity();
                if (hi > lo) {
                    const double pref = p->background_amplitude * std::pow(p->reference_frequency, -k);
                    if (std::abs(k - 1.0) < 1e-12)
                        total += pref * std::log(hi / lo);
                    else
                        total += pref * (std::pow(hi, k - 1.0) - std::pow(lo, k - 1.0)) / (k - 1.0);
                }
            }
            if (!p->peaks.empty()) {
                ParametricPsd peaks_only;
                peaks_only.peaks = p->peaks;
                numeric.emplace_back(peaks_only);
            }
        }
        else {
            const auto& tab = std::get<TabulatedPsd>(c);
            numeric.push_back(tab);
            for (double w : tab.omega)
                if (w > w0)
                    u_breaks.push_back(1.0 / w);
        }
    }
    if (numeric.empty())
        return total;
    const PsdModel rest(std::move(numeric));
    std::sort(u_breaks.begin(), u_breaks.end());
    u_breaks.erase(std::unique(u_breaks.begin(), u_breaks.end()), u_breaks.end());
    auto integrand = [&](double u) { return u > 0.0 ? evaluate_psd(rest, 1.0 / u) : 0.0; };
    for (std::size_t i = 0; i + 1 < u_breaks.size(); ++i)
        total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, u_breaks[i],
                                                                                u_breaks[i + 1], 15, 1e-12);
    return total;
}

std::vector<double> breakpoints(const PsdModel& model, double rabi, double t, double w_max)
{
    std::vector<double> b{0.0, w_max};
    for (double k : {0.0, 1.0, 3.0, 10.0})
        for (double s : {-1.0, 1.0})
            b.push_back(rabi + s * k / t);
    for (const auto& c : model.components()) {
        if (const auto* p = std::get_if<ParametricPsd>(&c)) {
            if (p->background_band) {
                b.push_back(p->background_band->first);
                b.push_back(p->background_band->second);
            }
            for (const auto& pk : p->peaks)
                for (double k : {0.0, 0.5, 1.5, 5.0, 15.0, 50.0})
                    for (double s : {-1.0, 1.0})
                        b.push_back(pk.center + s * k * pk.full_width);
        }
        else {
            const auto& tab = std::get<TabulatedPsd>(c);
            b.insert(b.end(), tab.omega.begin(), tab.omega.end());
        }
    }
    std::erase_if(b, [&](double x) { return !(x >= 0.0) || x > w_max; });
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end(), [&](double x, double y) { return y - x < 1e-9 / t; }), b.end());
    if (b.back() < w_max)
        b.push_back(w_max);

    // Subdivide so that no piece spans more than a few oscillation periods of the kernel.
    const double chunk = std::max(8.0 * kPi / t, w_max / 20000.0);
    std::vector<double> out{b.front()};
    for (std::size_t i = 1; i < b.size(); ++i) {
        const double span = b[i] - b[i - 1];
        const auto pieces = static_cast<std::size_t>(std::ceil(span / chunk));
        for (std::size_t j = 1; j < pieces; ++j)
            out.push_back(b[i - 1] + span * static_cast<double>(j) / static_cast<double>(pieces));
        out.push_back(b[i]);
    }
    return out;
}

std::array<Eigen::Matrix4cd, 4> filter_products()
{
    Eigen::Matrix4cd kc;
    kc << 0.0, -kI, -kI, 0.0,
        kI, 0.0, 0.0, -kI,
        kI, 0.0, 0.0, -kI,
        0.0, kI, kI, 0.0;
    Eigen::Matrix4cd ks = Eigen::Matrix4cd::Zero();
    ks(1, 1) = -2.0;
    ks(2, 2) = 2.0;
    return {kc * kc, kc * ks, ks * kc, ks * ks};
}

} // namespace

CumulantResult second_cumulant_integral(double rabi, const PsdModel& model, double t, CumulantOptions options)
{
    if (!(rabi > 0.0) || !std::isfinite(rabi))
        throw InputError("Rabi frequency must be positive");
    if (!(t > 0.0) || !std::isfinite(t))
        throw InputError("cumulant time must be positive");
    model.validate();

    CumulantResult res;
    res.exponent.setZero();
    if (model.is_zero())
        return res;
    check_convergence(model);

    double peak_max = 0.0;
    for (const auto& c : model.components())
        if (const auto* p = std::get_if<ParametricPsd>(&c))
            for (const auto& pk : p->peaks)
                peak_max = std::max(peak_max, pk.center + 10.0 * pk.full_width);
    const double w_max = 50.0 * std::max(rabi, peak_max) + 2000.0 / t;

    const Kernel kernel(rabi, t);
    auto integrand = [&](double w) {
        Vec4 v = kernel(w);
        const double s = evaluate_psd(model, w);
        for (double& x : v)
            x *= s;
        return v;
    };

    const auto grid = breakpoints(model, rabi, t, w_max);
    const std::size_t pieces = grid.size() - 1;
    const bool singular = singular_at_zero(model);

    std::vector<Segment> segs(pieces);
    double scale = 0.0;
    for (std::size_t i = 0; i < pieces; ++i) {
        if (i == 0 && singular)
            continue;
        segs[i] = kronrod_segment(integrand, grid[i], grid[i + 1]);
        scale += segs[i].l1;
    }
    if (singular) {
        boost::math::quadrature::tanh_sinh<double> ts;
        Segment& s0 = segs[0];
        for (int c = 0; c < 4; ++c) {
            double err = 0.0, l1 = 0.0;
            s0.value[c] = ts.integrate([&](double w) { return integrand(w)[c]; }, grid[0], grid[1],
                                       options.relative_tolerance, &err, &l1);
            s0.error += err;
            s0.l1 += l1;
        }
        scale += s0.l1;
    }
    if (!(scale > 0.0)) {
        res.exponent.setZero();
        return res;
    }
    const double budget = options.relative_tolerance * scale / static_cast<double>(pieces);
    Vec4 integral{};
    double error = 0.0;
    for (std::size_t i = 0; i < pieces; ++i) {
        if (!(i == 0 && singular) && segs[i].error > budget)
            segs[i] = adaptive(integrand, grid[i], grid[i + 1], budget, 24);
        for (int c = 0; c < 4; ++c)
            integral[c] += segs[i].value[c];
        error += segs[i].error;
    }
    if (!std::isfinite(error) || error > 1e-3 * scale)
        throw NumericalError("cumulant frequency integral did not converge: error estimate " +
                             io::format_double(error) + " against scale " + io::format_double(scale) +
                             " over [0, " + io::format_double(w_max) + "] rad/s");

    // Non-oscillatory large-w asymptote of Re J: [f(0) g(0) + int_0^t f g' ds] / w^2.
    const double s2 = std::sin(rabi * t);
    const double sin2 = std::sin(2.0 * rabi * t);
    const Vec4 asym{1.0 - 0.5 * s2 * s2, 0.5 * rabi * t + 0.25 * sin2, -(0.5 * rabi * t - 0.25 * sin2),
                    0.5 * s2 * s2};
    const double tail = tail_weight(model, w_max);
    double tail_abs = 0.0, body_abs = 0.0;
    for (int c = 0; c < 4; ++c) {
        tail_abs += std::abs(asym[c] * tail);
        body_abs += std::abs(integral[c]);
        integral[c] = (integral[c] + asym[c] * tail) / kPi;
    }

    const auto products = filter_products();
    const double pref = -0.25 * rabi * rabi;
    for (int c = 0; c < 4; ++c)
        res.exponent += pref * integral[c] * products[c];
    res.error_estimate = std::abs(pref) * error / kPi;
    res.max_imaginary = res.exponent.imag().cwiseAbs().maxCoeff();
    res.tail_fraction = tail_abs / std::max(tail_abs + body_abs, std::numeric_limits<double>::min());
    return res;
}

} // namespace spinlock
