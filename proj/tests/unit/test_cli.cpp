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


#include "commands.hpp"

#include "spinlock/io.hpp"
#include "spinlock/noise.hpp"
#include "spinlock/spectroscopy.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace spinlock;

namespace {

const fs::path kConfigs = SPINLOCK_CONFIG_DIR;

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run_cli(std::initializer_list<std::string> args)
{
    std::vector<std::string> storage{"spinlock"};
    storage.insert(storage.end(), args);
    std::vector<const char*> argv;
    for (const auto& s : storage)
        argv.push_back(s.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) { return io::read_file(p); }

void spit(const fs::path& p, const std::string& text)
{
    std::ofstream f(p, std::ios::binary);
    f << text;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("spinlock_cli_" + name))
    {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str(const std::string& leaf) const { return (path / leaf).string(); }
};

nlohmann::json load_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

} // namespace

TEST_CASE("config errors exit with 2 and point at the offending key")
{
    TempDir dir("errors");
    spit(dir.path / "bad.yaml", "seed: 1\ncoupling:\n  eta: 0.038\n  etta: 2\n");
    auto r = run_cli({"coupling", "-c", dir.str("bad.yaml"), "--out", dir.str("o")});
    CHECK(r.code == cli::kExitInput);
    CHECK(r.err.find("etta") != std::string::npos);
    CHECK(r.err.find("line 4") != std::string::npos);

    spit(dir.path / "top.yaml", "sede: 1\n");
    CHECK(run_cli({"coupling", "-c", dir.str("top.yaml")}).code == cli::kExitInput);

    spit(dir.path / "type.yaml", "coupling:\n  eta: lots\n");
    r = run_cli({"coupling", "-c", dir.str("type.yaml"), "--out", dir.str("o")});
    CHECK(r.code == cli::kExitInput);
    CHECK(r.err.find("eta") != std::string::npos);

    CHECK(run_cli({"coupling", "-c", dir.str("missing.yaml")}).code == cli::kExitInput);
    CHECK(run_cli({"frobnicate"}).code == cli::kExitInput);
    CHECK(run_cli({"scan", "--out", dir.str("o")}).code == cli::kExitInput);
    CHECK(run_cli({"--version"}).code == cli::kExitOk);
}

TEST_CASE("synthesize: zero model gives zero output")
{
    TempDir dir("zero");
    spit(dir.path / "c.yaml", "synthesize:\n  duration_s: 0.01\n  dt_s: 1.0e-4\n  trajectories: 2\n");
    REQUIRE(run_cli({"synthesize", "-c", dir.str("c.yaml"), "--out", dir.str("o")}).code == 0);
    const auto traj = io::parse_csv(slurp(dir.path / "o" / "trajectories.csv"));
    CHECK(traj.rows.size() == 101);
    for (const auto& row : traj.rows)
        for (std::size_t c = 1; c < row.size(); ++c)
            CHECK(std::stod(row[c]) == 0.0);
    const auto psd = read_psd_csv(dir.path / "o" / "psd_estimate.csv");
    for (double v : psd.value)
        CHECK(v == 0.0);
}

TEST_CASE("synthesize: power-law slope")
{
    TempDir dir("slope");
    REQUIRE(run_cli({"synthesize", "-c", (kConfigs / "synthesize.yaml").string(), "--out", dir.str("o")}).code == 0);
    const auto psd = read_psd_csv(dir.path / "o" / "psd_estimate.csv");
    double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
    for (std::size_t i = 0; i < psd.omega.size(); ++i) {
        const double f = psd.omega[i] / kTwoPi;
        if (f < 40.0 || f > 10000.0)
            continue;
        const double x = std::log(psd.omega[i]), y = std::log(psd.value[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        n += 1;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope == doctest::Approx(-1.5).epsilon(0.1 / 1.5));
}

TEST_CASE("identical config and seed give byte-identical outputs")
{
    TempDir dir("determinism");
    for (const char* cfg : {"synthesize.yaml", "scan.yaml"}) {
        const auto path = (kConfigs / cfg).string();
        const char* cmd = std::string(cfg) == "scan.yaml" ? "spectrum" : "synthesize";
        REQUIRE(run_cli({cmd, "-c", path, "--out", dir.str("a")}).code == 0);
        REQUIRE(run_cli({cmd, "-c", path, "--out", dir.str("b"), "--threads", "3"}).code == 0);
        REQUIRE(run_cli({cmd, "-c", path, "--out", dir.str("c"), "--seed", "99"}).code == 0);
        const auto manifest = load_json(dir.path / "a" / "manifest.json");
        bool differs = false;
        for (const auto& name : manifest["outputs"]) {
            const auto file = name.get<std::string>();
            CHECK(slurp(dir.path / "a" / file) == slurp(dir.path / "b" / file));
            differs = differs || slurp(dir.path / "a" / file) != slurp(dir.path / "c" / file);
        }
        CHECK(differs);
        fs::remove_all(dir.path / "a");
        fs::remove_all(dir.path / "b");
        fs::remove_all(dir.path / "c");
    }
}

TEST_CASE("manifest and resolved config")
{
    TempDir dir("manifest");
    REQUIRE(run_cli({"spectrum", "-c", (kConfigs / "scan.yaml").string(), "--out", dir.str("a"), "--seed", "11"})
                .code == 0);
    const auto m = load_json(dir.path / "a" / "manifest.json");
    CHECK(m["command"] == "spectrum");
    CHECK(m["seed"] == 11);
    CHECK(m["status"] == "ok");
    CHECK(m["outputs"].size() == 3);
    CHECK(fs::exists(dir.path / "a" / "resolved_config.yaml"));

    // the echoed configuration reproduces the run, including the seed override
    REQUIRE(run_cli({"spectrum", "-c", dir.str("a/resolved_config.yaml"), "--out", dir.str("b")}).code == 0);
    for (const char* f : {"scan.csv", "spectrum.csv", "fits.json"})
        CHECK(slurp(dir.path / "a" / f) == slurp(dir.path / "b" / f));
}

TEST_CASE("coupling optimum and range warning")
{
    TempDir dir("coupling");
    REQUIRE(run_cli({"coupling", "-c", (kConfigs / "coupling.yaml").string(), "--out", dir.str("a")}).code == 0);
    const auto opt = load_json(dir.path / "a" / "optimum.json");
    CHECK(opt["nbar_opt"].get<double>() == doctest::Approx(610.0).epsilon(30.0 / 610.0));
    CHECK(opt["spread"].get<double>() >= 2e-4);
    CHECK(opt["spread"].get<double>() <= 4.5e-4);
    const auto table = io::parse_csv(slurp(dir.path / "a" / "coupling.csv"));
    CHECK(table.rows.size() == 2001);

    spit(dir.path / "small.yaml", "coupling:\n  eta: 0.001\n  n_max: 100\n");
    const auto r = run_cli({"coupling", "-c", dir.str("small.yaml"), "--out", dir.str("b")});
    CHECK(r.code == 0);
    CHECK(r.err.find("range limit") != std::string::npos);
    const auto small = load_json(dir.path / "b" / "optimum.json");
    CHECK(small["nbar_opt"].is_null());
    CHECK(load_json(dir.path / "b" / "manifest.json")["warnings"].size() == 1);
}

TEST_CASE("spectrum from a scan file")
{
    TempDir dir("spectrum");
    // sx = exp(-rate t) with rates placing S_nu = 2 rate on, below and above the floor
    std::string csv = "omega_rad_s,t_s,sx_mean,sx_stderr,shots,flags\n";
    for (double rate : {0.45, 0.40, 2.0}) {
        const double omega = kTwoPi * 1000.0 * (rate + 1.0);
        for (int i = 0; i < 10; ++i) {
            const double t = 0.2 * i;
            csv += io::csv_line({io::format_double(omega), io::format_double(t),
                                 io::format_double(std::exp(-rate * t)), "0.01", "150", "ok"});
        }
    }
    spit(dir.path / "scan.csv", csv);
    spit(dir.path / "c.yaml", "spectrum:\n  input: scan.csv\n  gamma: 0.9\n");
    REQUIRE(run_cli({"spectrum", "-c", dir.str("c.yaml"), "--out", dir.str("o")}).code == 0);
    const auto spec = io::parse_csv(slurp(dir.path / "o" / "spectrum.csv"));
    REQUIRE(spec.rows.size() == 3);
    const auto c_nu = spec.column("S_nu");
    const auto c_flags = spec.column("flags");
    const double expect[] = {0.9, 0.8, 4.0};
    for (std::size_t i = 0; i < 3; ++i) {
        const double s_nu = std::stod(spec.rows[i][c_nu]);
        CHECK(s_nu == doctest::Approx(expect[i]).epsilon(1e-6));
        const bool flagged = spec.rows[i][c_flags].find("below_floor") != std::string::npos;
        CHECK(flagged == (i < 2));
    }

    spit(dir.path / "empty.csv", "omega_rad_s,t_s,sx_mean,sx_stderr,shots,flags\n");
    spit(dir.path / "e.yaml", "spectrum:\n  input: empty.csv\n");
    CHECK(run_cli({"spectrum", "-c", dir.str("e.yaml"), "--out", dir.str("e")}).code == cli::kExitInput);
}

TEST_CASE("sideband config runs at the optimal displacement")
{
    TempDir dir("sideband");
    REQUIRE(run_cli({"scan", "-c", (kConfigs / "sideband.yaml").string(), "--out", dir.str("o")}).code == 0);
    const auto data = read_scan_csv(dir.path / "o" / "scan.csv");
    CHECK(data.rows.front().omega == doctest::Approx(kTwoPi * 600.0 * 0.58199).epsilon(1e-4));
}

TEST_CASE("demo figures")
{
    TempDir dir("demo");
    spit(dir.path / "c.yaml", "demo:\n  trajectories: 2\n  shots: 150\n  spectrum_points: 4\n");
    const auto r = run_cli({"demo-figures", "-c", dir.str("c.yaml"), "--out", dir.str("o")});
    REQUIRE(r.code == 0);
    const auto out = dir.path / "o";
    for (const char* f : {"decay_curves.csv", "sideband_coupling.csv", "displacement_average.csv", "displacement_optimum.json",
                          "spectrum_scan.csv", "spectrum.csv", "spectrum_evolution.csv", "spectrum_fits.json",
                          "tone_bloch.csv", "tone_fit.json"})
        CHECK(fs::exists(out / f));

    const auto decay = io::parse_csv(slurp(out / "decay_curves.csv"));
    std::vector<std::string> levels;
    for (const auto& row : decay.rows)
        if (std::find(levels.begin(), levels.end(), row[0]) == levels.end())
            levels.push_back(row[0]);
    CHECK(levels.size() == 3);

    const auto bloch = io::parse_csv(slurp(out / "tone_bloch.csv"));
    for (const char* col : {"sx", "sy", "sz"})
        CHECK_NOTHROW(bloch.column(col));
    // 150 shots give sx values on a 2/150 lattice
    const auto c = bloch.column("sx");
    for (const auto& row : bloch.rows) {
        const double k = (std::stod(row[c]) + 1.0) * 75.0;
        CHECK(std::abs(k - std::round(k)) < 1e-9);
    }
    const auto fit = load_json(out / "tone_fit.json");
    CHECK(fit["delta_fit"].get<double>() == doctest::Approx(1.48).epsilon(0.02 / 1.48));
}
