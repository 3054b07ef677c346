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

#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

using namespace spinlock;
using cd = std::complex<double>;

namespace {

// exp(i eta (a + a^dag)) |n>, restricted to Fock states n - half .. n + half, by Taylor
// substeps of the tridiagonal generator.
std::vector<cd> displaced_fock(double eta, std::size_t n, std::size_t half)
{
    const std::size_t lo = n > half ? n - half : 0;
    const std::size_t hi = n + half;
    const std::size_t dim = hi - lo + 1;
    auto apply = [&](const std::vector<cd>& v) {
        std::vector<cd> out(dim, 0.0);
        for (std::size_t i = 0; i < dim; ++i) {
            const double m = double(lo + i);
            if (i > 0)
                out[i] += std::sqrt(m) * v[i - 1];
            if (i + 1 < dim)
                out[i] += std::sqrt(m + 1.0) * v[i + 1];
        }
        return out;
    };
    const double norm_bound = 2.0 * std::sqrt(double(hi) + 1.0);
    const int steps = std::max(1, int(std::ceil(eta * norm_bound / 0.25)));
    const cd ih(0.0, eta / steps);
    std::vector<cd> psi(dim, 0.0);
    psi[n - lo] = 1.0;
    for (int s = 0; s < steps; ++s) {
        std::vector<cd> term = psi, acc = psi;
        for (int k = 1; k < 60; ++k) {
            term = apply(term);
            double mag = 0.0;
            for (auto& x : term) {
                x *= ih / double(k);
                mag = std::max(mag, std::abs(x));
            }
            for (std::size_t i = 0; i < dim; ++i)
                acc[i] += term[i];
            if (mag < 1e-20)
                break;
        }
        psi = acc;
    }
    std::vector<cd> full(hi + 1, 0.0);
    for (std::size_t i = 0; i < dim; ++i)
        full[lo + i] = psi[i];
    return full;
}

} // namespace

TEST_CASE("matrix elements: simple values")
{
    CHECK(fock_matrix_element(0.038, 0, 1) == doctest::Approx(0.038 * std::exp(-0.038 * 0.038 / 2)).epsilon(1e-14));
    CHECK(fock_matrix_element(0.038, 0, 1) == doctest::Approx(0.037973).epsilon(1e-4));
    for (double eta : {0.01, 0.038, 0.3, 0.9})
        CHECK(fock_matrix_element(eta, 0, 0) == doctest::Approx(std::exp(-eta * eta / 2)).epsilon(1e-15));
    CHECK(relative_coupling(0.038, 0, 0) == 1.0);
    CHECK_THROWS_AS(fock_matrix_element(0.0, 1, 1), InputError);
    CHECK_THROWS_AS(fock_matrix_element(0.1, 1, 2), InputError);
}

TEST_CASE("matrix elements: dense matrix exponential oracle")
{
    const int dim = 80;
    for (double eta : {0.038, 0.1, 0.5}) {
        Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(dim, dim);
        for (int m = 1; m < dim; ++m) {
            g(m, m - 1) = std::sqrt(double(m));
            g(m - 1, m) = std::sqrt(double(m));
        }
        const Eigen::MatrixXcd u = (cd(0.0, eta) * g).exp();
        for (int n = 0; n <= 20; ++n) {
            CHECK(fock_matrix_element(eta, n, 0) == doctest::Approx(std::abs(u(n, n))).epsilon(1e-12));
            CHECK(fock_matrix_element(eta, n, 1) == doctest::Approx(std::abs(u(n + 1, n))).epsilon(1e-12));
        }
    }
}

TEST_CASE("matrix elements: truncated displacement oracle up to n = 2000")
{
    for (double eta : {0.038, 0.1}) {
        double worst = 0.0;
        std::vector<std::size_t> ns;
        for (std::size_t n = 0; n <= 60; ++n)
            ns.push_back(n);
        for (std::size_t n = 67; n <= 2000; n += 23)
            ns.push_back(n);
        ns.push_back(2000);
        for (std::size_t n : ns) {
            const auto psi = displaced_fock(eta, n, 120);
            for (int s : {0, 1}) {
                const double ref = std::abs(psi[n + std::size_t(s)]);
                const double got = fock_matrix_element(eta, n, s);
                const double err = std::abs(got - ref);
                CHECK(err <= 1e-10 * ref + 1e-15);
                worst = std::max(worst, err / std::max(ref, 1e-300));
            }
        }
        MESSAGE("eta " << eta << " worst relative deviation " << worst);
    }
}

TEST_CASE("coupling near the optimum is stationary")
{
    const double eta = 0.038;
    const auto w = relative_couplings(eta, 700, 1);
    const double slope = (w[611] - w[609]) / 2.0 / w[610];
    CHECK(std::abs(slope) < 1e-4);
    // Laguerre factor stays positive through the maximum
    const std::size_t peak = std::size_t(std::max_element(w.begin(), w.end()) - w.begin());
    CHECK(std::all_of(w.begin(), w.begin() + long(peak) + 1, [](double x) { return x > 0.0; }));
}

TEST_CASE("coherent-state Fock distribution")
{
    const auto p0 = coherent_fock_distribution(0.0, 0);
    REQUIRE(p0.size() == 1);
    CHECK(p0[0] == 1.0);

    for (double nbar : {610.0, 610.5}) {
        const std::size_t cutoff = default_cutoff(nbar);
        CHECK(poisson_tail(nbar, cutoff) < kPoissonTailBound);
        const auto p = coherent_fock_distribution(nbar, cutoff);
        double sum = 0.0, mean = 0.0;
        for (std::size_t n = 0; n < p.size(); ++n) {
            sum += p[n];
            mean += double(n) * p[n];
        }
        double var = 0.0;
        for (std::size_t n = 0; n < p.size(); ++n)
            var += (double(n) - mean) * (double(n) - mean) * p[n];
        CHECK(std::abs(sum - 1.0) < 1e-12);
        CHECK(mean == doctest::Approx(nbar).epsilon(1e-9));
        CHECK(var == doctest::Approx(nbar).epsilon(1e-9));
        const auto mode = std::size_t(std::max_element(p.begin(), p.end()) - p.begin());
        // for integer nbar the modes nbar - 1 and nbar tie
        CHECK(p[mode] == doctest::Approx(p[std::size_t(std::floor(nbar))]).epsilon(1e-14));
        if (nbar != std::floor(nbar))
            CHECK(mode == std::size_t(std::floor(nbar)));
    }
    CHECK_THROWS_AS(coherent_fock_distribution(610.0, 650), InputError);
    CHECK_THROWS_AS(coherent_fock_distribution(-1.0, 10), InputError);
}

TEST_CASE("average sideband Rabi frequency")
{
    const double eta = 0.038;
    CHECK(average_sideband_rabi(eta, 0.0) == doctest::Approx(eta).epsilon(1e-14));
    CHECK(rabi_spread(eta, 0.0) == 0.0);

    double previous = 0.0;
    for (double nbar = 0.0; nbar <= 580.0; nbar += 20.0) {
        const double v = average_sideband_rabi(eta, nbar);
        CHECK(v > previous);
        previous = v;
    }

    // Lamb-Dicke limit
    for (double nbar : {1.0, 10.0, 100.0}) {
        const double e = 1e-3;
        const auto p = coherent_fock_distribution(nbar, default_cutoff(nbar));
        double ld = 0.0;
        for (std::size_t n = 0; n < p.size(); ++n)
            ld += p[n] * e * std::sqrt(double(n) + 1.0);
        CHECK(average_sideband_rabi(e, nbar) / e == doctest::Approx(ld / e).epsilon(1e-3));
    }
}

TEST_CASE("optimal displacement")
{
    const auto opt = optimal_displacement(0.038);
    CHECK(opt.nbar >= 580.0);
    CHECK(opt.nbar <= 640.0);
    CHECK(opt.relative_rabi == doctest::Approx(average_sideband_rabi(0.038, opt.nbar)));
    CHECK(opt.spread >= 2e-4);
    CHECK(opt.spread <= 4.5e-4);
    // golden-section style tolerance: neighbours one phonon away are not better
    CHECK(average_sideband_rabi(0.038, opt.nbar + 1.0) <= opt.relative_rabi);
    CHECK(average_sideband_rabi(0.038, opt.nbar - 1.0) <= opt.relative_rabi);

    for (double f : {0.9, 0.95, 1.05, 1.1})
        CHECK(rabi_spread(0.038, f * opt.nbar) > opt.spread);
    CHECK(rabi_spread(0.038, 100.0) > 10.0 * opt.spread);

    const auto half = optimal_displacement(0.019);
    CHECK(half.nbar == doctest::Approx(4.0 * opt.nbar).epsilon(0.1));
    const auto twice = optimal_displacement(0.076);
    CHECK(twice.nbar >= 130.0);
    CHECK(twice.nbar <= 170.0);

    OptimumOptions narrow;
    narrow.nbar_max = 100.0;
    CHECK_THROWS_AS(optimal_displacement(0.038, narrow), SearchError);
}

TEST_CASE("sideband excitation")
{
    const double eta = 0.038, nbar = 600.0, rabi = kTwoPi * 50e3;
    const double bsb = rabi * average_sideband_rabi(eta, nbar);
    CHECK(sideband_excitation_probability(eta, nbar, rabi, 0.0) == 0.0);
    CHECK(sideband_excitation_probability(eta, nbar, rabi, kPi / bsb) == doctest::Approx(1.0).epsilon(1e-12));

    std::vector<double> t, p;
    for (int i = 1; i <= 40; ++i) {
        t.push_back(i * 0.1 * kPi / bsb);
        p.push_back(sideband_excitation_probability(eta, nbar, rabi, t.back()));
    }
    CHECK(fit_sideband_rabi(t, p) == doctest::Approx(bsb).epsilon(0.01));
}

TEST_CASE("coupling table")
{
    const auto table = coupling_table(0.038, 5);
    REQUIRE(table.size() == 6);
    CHECK(table.carrier[0] == 1.0);
    CHECK(table.blue_sideband[0] == doctest::Approx(0.038));
    const auto csv = coupling_csv(table);
    CHECK(csv.rfind("n,carrier,blue_sideband\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
}
