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
#include "spinlock/spectroscopy.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <vector>

using namespace spinlock;

namespace {

std::vector<double> linspace(double a, double b, std::size_t n)
{
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = a + (b - a) * double(i) / double(n - 1);
    return v;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Scan in which every Omega is sampled up to a decay exponent of about 2.
ProtocolConfig flat_scan(double s0)
{
    ProtocolConfig c;
    c.rabi = {kTwoPi * 300.0, kTwoPi * 600.0, kTwoPi * 1200.0};
    for (double om : c.rabi)
        c.times.push_back(linspace(0.0, 4.0 / (om * om * 2e-6), 12));
    c.noise = PsdModel::power_law(s0, 0.0, 1.0, std::pair{0.5 * c.rabi.front(), 2.0 * c.rabi.back()});
    c.shots = 2000;
    c.trajectories = 200;
    c.step_factor = 0.05;
    c.seed = 77;
    return c;
}

OmegaFit synthetic_fit(double omega, double rate)
{
    OmegaFit f;
    f.omega = omega;
    f.fit.success = true;
    f.fit.rate = rate;
    f.fit.rate_se = 0.01;
    return f;
}

} // namespace

TEST_CASE("flags")
{
    CHECK(format_flags(0) == "ok");
    CHECK(format_flags(kFlagWeakNoise | kFlagBelowFloor) == "weak_noise|below_floor");
    for (unsigned f = 0; f < 64; ++f)
        CHECK(parse_flags(format_flags(f)) == f);
    CHECK_THROWS_AS(parse_flags("nonsense"), InputError);
}

TEST_CASE("protocol validation")
{
    ProtocolConfig c;
    CHECK_THROWS_AS(c.validate(), InputError);
    c.rabi = {2.0, 1.0};
    c.times = {{0.0, 1.0}};
    CHECK_THROWS_AS(c.validate(), InputError);
    c.rabi = {1.0, 2.0};
    c.shots = 0;
    CHECK_THROWS_AS(c.validate(), InputError);
    c.shots = 10;
    c.transition = Transition::BlueSideband;
    CHECK_THROWS_AS(c.validate(), InputError);
}

TEST_CASE("noiseless protocol stays locked")
{
    ProtocolConfig c;
    c.rabi = {kTwoPi * 500.0, kTwoPi * 800.0};
    c.times = {linspace(0.0, 0.01, 5)};
    c.shots = 150;
    c.trajectories = 3;
    const auto d = simulate_protocol(c);
    REQUIRE(d.rows.size() == 10);
    for (const auto& r : d.rows) {
        CHECK(r.sx_mean == 1.0);
        CHECK(r.sx_stderr > 0.0);
        CHECK(r.shots == 150);
        CHECK(r.flags == 0);
    }
}

TEST_CASE("scan CSV round trip")
{
    ProtocolConfig c;
    c.rabi = {kTwoPi * 500.0};
    c.times = {linspace(0.0, 0.01, 4)};
    c.noise = PsdModel::white(1e-9);
    c.trajectories = 4;
    const auto d = simulate_protocol(c);
    const auto dir = std::filesystem::temp_directory_path() / "spinlock_test_scan";
    std::filesystem::create_directories(dir);
    write_scan_csv(dir / "scan.csv", d);
    const auto back = read_scan_csv(dir / "scan.csv");
    CHECK(scan_csv(back) == scan_csv(d));
    {
        std::FILE* f = std::fopen((dir / "empty.csv").c_str(), "w");
        std::fputs("omega_rad_s,t_s,sx_mean,sx_stderr,shots,flags\n", f);
        std::fclose(f);
        CHECK_THROWS_AS(read_scan_csv(dir / "empty.csv"), InputError);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("flat spectrum: rates, slope and linearity")
{
    const double s0 = 2e-6;
    const auto c = flat_scan(s0);
    const auto fits = fit_scan(simulate_protocol(c), FitChoice::Exponential);
    REQUIRE(fits.size() == 3);
    for (const auto& f : fits) {
        REQUIRE(f.fit.success);
        CHECK(f.fit.rate == doctest::Approx(0.5 * f.omega * f.omega * s0).epsilon(0.05));
    }
    const auto spec = reconstruct_spectrum(fits);
    std::vector<double> w, s;
    for (const auto& r : spec.rows) {
        w.push_back(r.omega);
        s.push_back(r.s_nu);
        CHECK(r.s_phi == 2.0 * r.rate / (r.omega * r.omega));
        CHECK(r.s_nu == doctest::Approx(r.omega * r.omega * r.s_phi).epsilon(1e-15));
        CHECK(std::isnan(r.delta_nu));
    }
    CHECK(loglog_slope(w, s) == doctest::Approx(2.0).epsilon(0.05));

    auto doubled = c;
    doubled.noise = c.noise.scaled(2.0);
    for (auto& grid : doubled.times)
        for (double& t : grid)
            t *= 0.5;
    const auto fits2 = fit_scan(simulate_protocol(doubled), FitChoice::Exponential);
    for (std::size_t i = 0; i < fits.size(); ++i) {
        const double diff = fits2[i].fit.rate - 2.0 * fits[i].fit.rate;
        const double se = std::hypot(fits2[i].fit.rate_se, 2.0 * fits[i].fit.rate_se);
        CHECK(std::abs(diff) < 3.0 * se);
    }
}

TEST_CASE("carrier and sideband discriminate motional noise")
{
    MotionConfig m;
    m.mode = {kTwoPi * 3.167e6, 0.038, 0};
    m.nbar = 600.0;
    const double scale = average_sideband_rabi(0.038, 600.0);
    ProtocolConfig c;
    c.rabi = {kTwoPi * 1000.0 / scale};
    const double om = c.rabi[0] * scale;
    const double s0 = 2e-6;
    m.motional_noise = PsdModel::power_law(s0, 0.0, 1.0, std::pair{0.5 * om, 2.0 * om});
    c.motion = m;
    c.times = {linspace(0.0, 4.0 / (om * om * s0), 12)};
    c.shots = 1000;
    c.trajectories = 200;
    c.step_factor = 0.05;
    c.seed = 7;

    c.transition = Transition::Carrier;
    const auto carrier = fit_scan(simulate_protocol(c), FitChoice::Exponential);
    REQUIRE(carrier.front().fit.success);
    CHECK(std::abs(carrier.front().fit.rate) < 3.0 * carrier.front().fit.rate_se);

    c.transition = Transition::BlueSideband;
    const auto data = simulate_protocol(c);
    CHECK(data.rabi_scale == doctest::Approx(scale));
    CHECK(data.rows.front().omega == doctest::Approx(om));
    CHECK(data.warnings.empty());
    const auto sideband = fit_scan(data, FitChoice::Exponential);
    REQUIRE(sideband.front().fit.success);
    const double expect = 0.5 * om * om * s0;
    CHECK(sideband.front().fit.rate_se < 0.05 * expect);
    CHECK(std::abs(sideband.front().fit.rate - expect) < 3.0 * sideband.front().fit.rate_se);
}

TEST_CASE("large sideband spread is flagged")
{
    ProtocolConfig c;
    c.transition = Transition::BlueSideband;
    c.motion = MotionConfig{{kTwoPi * 3e6, 0.038, 0}, 100.0, PsdModel{}};
    c.rabi = {kTwoPi * 1000.0};
    c.times = {linspace(0.0, 0.005, 3)};
    c.trajectories = 1;
    const auto d = simulate_protocol(c);
    CHECK(d.rabi_spread >= 1e-3);
    CHECK_FALSE(d.warnings.empty());
    for (const auto& r : d.rows)
        CHECK((r.flags & kFlagRabiSpread) != 0);
}

TEST_CASE("detection floor")
{
    const DetectionFloor floor;
    CHECK(floor.limit() == 0.9);
    const double om = kTwoPi * 1000.0;
    const std::vector<OmegaFit> fits{synthetic_fit(om, 0.45), synthetic_fit(om * 1.1, 0.44),
                                     synthetic_fit(om * 1.2, 0.4500001), synthetic_fit(om * 1.3, 30.0)};
    const auto spec = reconstruct_spectrum(fits, floor);
    CHECK(spec.rows[0].s_nu == 0.9);
    for (const auto& r : spec.rows)
        CHECK(((r.flags & kFlagBelowFloor) != 0) == (r.s_nu <= 0.9));
    CHECK((spec.rows[0].flags & kFlagBelowFloor) != 0);
    CHECK((spec.rows[1].flags & kFlagBelowFloor) != 0);
    CHECK((spec.rows[2].flags & kFlagBelowFloor) == 0);
    CHECK((spec.rows[3].flags & kFlagBelowFloor) == 0);

    auto failed = fits;
    failed[1].fit.success = false;
    CHECK_THROWS_AS(reconstruct_spectrum(failed), NumericalError);
}

TEST_CASE("weak-noise check")
{
    const double om = kTwoPi * 1000.0;
    CHECK(weak_noise_check(om, PsdModel{}, 1.0).ok);

    // flat S with 1/2 Omega^2 S t_max = 10
    const double t_max = 0.1, s0 = 20.0 / (om * om * t_max);
    const auto r = weak_noise_check(om, PsdModel::white(s0), t_max);
    CHECK_FALSE(r.ok);
    CHECK(r.decay_exponent == doctest::Approx(10.0));
    CHECK(weak_noise_check(om, PsdModel::white(s0), t_max / 4.0).ok);

    // S_nu = 80 (w / 2 pi 200 Hz)^-1.5 per second extended down to 20 Hz
    const double w200 = kTwoPi * 200.0;
    const auto low = PsdModel::power_law(80.0 / (w200 * w200), -3.5, w200, std::pair{kTwoPi * 20.0, kTwoPi * 1e4});
    const auto at100 = weak_noise_check(kTwoPi * 100.0, low, 0.05);
    CHECK_FALSE(at100.ok);
    CHECK(at100.rms_phase > 0.3);
    CHECK(at100.diagnostic.find("rms phase") != std::string::npos);
    CHECK(weak_noise_check(kTwoPi * 200.0, low, 0.05).ok);
}

TEST_CASE("single peak shows up only in its Omega bin")
{
    ProtocolConfig c;
    c.rabi = {kTwoPi * 400.0, kTwoPi * 600.0, kTwoPi * 800.0, kTwoPi * 1000.0};
    const double bg = 2e-7;
    ParametricPsd p;
    p.background_amplitude = bg;
    p.reference_frequency = 1.0;
    p.background_band = std::pair{0.5 * c.rabi.front(), 2.0 * c.rabi.back()};
    p.peaks.push_back({c.rabi[2], 2e-6, kTwoPi * 10.0});
    c.noise = PsdModel(p);
    for (double om : c.rabi)
        c.times.push_back(linspace(0.0, 0.6 / (om * om * bg), 12));
    c.shots = 2000;
    c.trajectories = 150;
    c.step_factor = 0.05;
    c.seed = 11;
    const auto fits = fit_scan(simulate_protocol(c), FitChoice::Exponential);
    for (std::size_t i = 0; i < fits.size(); ++i) {
        const double expect = 0.5 * fits[i].omega * fits[i].omega * bg;
        if (i == 2)
            CHECK(fits[i].fit.rate > expect + 10.0 * fits[i].fit.rate_se);
        else
            CHECK(std::abs(fits[i].fit.rate - expect) < 3.0 * fits[i].fit.rate_se);
    }
}

TEST_CASE("scan results do not depend on threads")
{
    ProtocolConfig c;
    c.rabi = {kTwoPi * 500.0, kTwoPi * 700.0, kTwoPi * 900.0};
    c.times = {linspace(0.0, 0.01, 4)};
    c.noise = PsdModel::power_law(1e-7, 0.0, 1.0, std::pair{1000.0, 10000.0});
    c.trajectories = 5;
    c.step_factor = 0.05;
    c.threads = 1;
    const auto a = scan_csv(simulate_protocol(c));
    c.threads = 3;
    CHECK(scan_csv(simulate_protocol(c)) == a);
}
