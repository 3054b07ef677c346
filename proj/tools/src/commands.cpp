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

#include "spinlock/dynamics.hpp"
#include "spinlock/io.hpp"
#include "spinlock/motion.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <random>

#ifndef SPINLOCK_VERSION
#define SPINLOCK_VERSION "0.0.0"
#endif

namespace spinlock::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

void write_json(const fs::path& path, const json& j) { io::write_file_atomic(path, j.dump(2) + "\n"); }

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string fmt(double v) { return io::format_double(v); }

std::vector<double> linspace(double a, double b, std::size_t n)
{
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return out;
}

std::vector<double> logspace(double a, double b, std::size_t n)
{
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = n == 1 ? a : a * std::pow(b / a, static_cast<double>(i) / static_cast<double>(n - 1));
    return out;
}

struct FitReport {
    json rows = json::array();
};

json fit_json(const OmegaFit& f, const SpectrumRow* row)
{
    json j;
    j["omega_rad_s"] = f.omega;
    j["model"] = f.fit.model == DecayModel::Exponential ? "exponential" : "damped_cosine";
    j["success"] = f.fit.success;
    j["rate_per_s"] = f.fit.rate;
    j["rate_se"] = number_or_null(f.fit.rate_se);
    j["beta_rad"] = f.fit.beta;
    j["beta_se"] = number_or_null(f.fit.beta_se);
    j["amplitude"] = f.fit.amplitude;
    j["chi2"] = f.fit.chi2;
    j["dof"] = f.fit.dof;
    if (row) {
        j["S_phi"] = row->s_phi;
        j["S_nu"] = row->s_nu;
        j["S_nu_err"] = number_or_null(row->s_nu_err);
        j["delta_nu_Hz"] = number_or_null(row->delta_nu);
    }
    j["flags"] = format_flags(row ? row->flags : f.flags);
    return j;
}

std::vector<double> time_grid(const TimeGridSpec& spec, double omega, const PsdModel& model, const YAML::Node& node)
{
    if (!spec.fixed.empty())
        return spec.fixed;
    double stop = 0.0;
    if (spec.stop) {
        stop = *spec.stop;
    }
    else {
        const double rate = 0.5 * omega * omega * evaluate_psd(model, omega);
        if (rate > 0.0)
            stop = *spec.target_exponent / rate;
        else if (spec.max_stop > 0.0)
            stop = spec.max_stop;
        else
            fail(node, "times_s.target_exponent needs non-zero noise at every Rabi frequency or a max_stop");
        if (spec.max_stop > 0.0)
            stop = std::min(stop, spec.max_stop);
        stop = std::max(stop, spec.min_stop);
    }
    if (!(stop > spec.start))
        fail(node, "times_s: stop must exceed start");
    return linspace(spec.start, stop, spec.points);
}

} // namespace

ProtocolConfig build_protocol(const RunConfig& config)
{
    const auto node = config.section("scan");
    if (!node)
        throw ConfigError("config: missing 'scan' section");
    check_keys(node, "scan", {"transition", "rabi_hz", "times_s", "shots", "trajectories", "step_factor", "motion"});
    ProtocolConfig p;
    const auto transition = get_string(node, "transition", "carrier");
    if (transition == "blue_sideband")
        p.transition = Transition::BlueSideband;
    else if (transition != "carrier")
        fail(node["transition"], "transition must be 'carrier' or 'blue_sideband'");
    if (!node["rabi_hz"])
        fail(node, "scan needs 'rabi_hz'");
    for (double f : parse_grid(node["rabi_hz"], "rabi_hz"))
        p.rabi.push_back(hz(f));
    p.shots = get_u64(node, "shots", 150);
    p.trajectories = get_u64(node, "trajectories", 100);
    p.step_factor = get_double(node, "step_factor", 0.01);
    p.noise = config.noise;
    p.modulation = config.modulation;
    p.seed = config.seed;
    p.threads = config.threads;

    double scale = 1.0;
    PsdModel total = p.noise;
    if (const auto m = node["motion"]) {
        check_keys(m, "scan.motion", {"eta", "mode_hz", "nbar", "noise"});
        MotionConfig mc;
        mc.mode.lamb_dicke = require_double(m, "eta");
        mc.mode.frequency = hz(get_double(m, "mode_hz", 3.167e6));
        try {
            mc.mode.validate();
        }
        catch (const InputError& e) {
            fail(m, e.what());
        }
        if (m["nbar"] && m["nbar"].IsScalar() && m["nbar"].Scalar() == "optimal")
            mc.nbar = optimal_displacement(mc.mode.lamb_dicke).nbar;
        else
            mc.nbar = require_double(m, "nbar");
        mc.motional_noise = parse_noise(m["noise"], config.base_dir);
        if (p.transition == Transition::BlueSideband) {
            scale = average_sideband_rabi(mc.mode.lamb_dicke, mc.nbar);
            total = total + mc.motional_noise;
        }
        p.motion = mc;
    }

    const auto times = parse_times(node["times_s"]);
    const bool shared = !times.fixed.empty() || times.stop.has_value();
    if (shared) {
        p.times.push_back(time_grid(times, 0.0, total, node["times_s"]));
    }
    else {
        for (double w : p.rabi)
            p.times.push_back(time_grid(times, w * scale, total, node["times_s"]));
    }
    try {
        p.validate();
    }
    catch (const InputError& e) {
        fail(node, e.what());
    }
    return p;
}

CommandResult cmd_synthesize(const RunConfig& config)
{
    const auto node = config.section("synthesize");
    if (!node)
        throw ConfigError("config: missing 'synthesize' section");
    check_keys(node, "synthesize", {"duration_s", "dt_s", "trajectories", "write_trajectories"});
    const double duration = require_double(node, "duration_s");
    const double dt = require_double(node, "dt_s");
    const auto count = get_u64(node, "trajectories", 1);
    const bool write_traj = get_bool(node, "write_trajectories", true);
    if (count < 1)
        fail(node, "trajectories must be >= 1");

    std::vector<NoiseTrajectory> traj(count);
    parallel_for(count, config.threads, [&](std::size_t i) {
        traj[i] = synthesize_trajectory(config.noise, duration, dt, derive_seed(config.seed, i));
    });

    CommandResult res;
    if (write_traj) {
        std::vector<std::string> header{"t_s"};
        for (std::size_t i = 0; i < count; ++i)
            header.push_back("phi_" + std::to_string(i));
        std::string text = io::csv_line(header);
        for (std::size_t k = 0; k < traj[0].samples.size(); ++k) {
            std::vector<std::string> row{fmt(static_cast<double>(k) * dt)};
            for (const auto& t : traj)
                row.push_back(fmt(t.samples[k]));
            text += io::csv_line(row);
        }
        io::write_file_atomic(config.out_dir / "trajectories.csv", text);
        res.outputs.push_back("trajectories.csv");
    }
    const auto est = estimate_psd(traj);
    TabulatedPsd positive;
    TabulatedPsd model;
    for (std::size_t k = 1; k < est.omega.size(); ++k) {
        positive.omega.push_back(est.omega[k]);
        positive.value.push_back(est.value[k]);
        model.omega.push_back(est.omega[k]);
        model.value.push_back(evaluate_psd(config.noise, est.omega[k]));
    }
    write_psd_csv(config.out_dir / "psd_estimate.csv", positive);
    write_psd_csv(config.out_dir / "psd_model.csv", model);
    res.outputs.push_back("psd_estimate.csv");
    res.outputs.push_back("psd_model.csv");
    return res;
}

CommandResult cmd_coupling(const RunConfig& config)
{
    const auto node = config.section("coupling");
    if (!node)
        throw ConfigError("config: missing 'coupling' section");
    check_keys(node, "coupling", {"eta", "n_max", "nbar_min", "nbar_max", "curve_points"});
    const double eta = require_double(node, "eta");
    if (!(eta > 0.0 && eta < 0.5))
        fail(node["eta"], "eta must satisfy 0 < eta < 0.5");
    const auto n_max = get_u64(node, "n_max", 2000);
    const double nbar_min = get_double(node, "nbar_min", 1.0);
    const double nbar_max = get_double(node, "nbar_max", 1e5);
    const auto points = get_u64(node, "curve_points", 200);
    if (!(nbar_min > 0.0 && nbar_max > nbar_min) || points < 2)
        fail(node, "coupling needs 0 < nbar_min < nbar_max and curve_points >= 2");

    CommandResult res;
    write_coupling_csv(config.out_dir / "coupling.csv", coupling_table(eta, n_max));
    res.outputs.push_back("coupling.csv");

    const auto grid = logspace(nbar_min, nbar_max, points);
    std::vector<double> avg(points), spread(points);
    parallel_for(points, config.threads, [&](std::size_t i) {
        avg[i] = average_sideband_rabi(eta, grid[i]);
        spread[i] = rabi_spread(eta, grid[i]);
    });
    std::string text = "nbar,average_rabi,spread\n";
    for (std::size_t i = 0; i < points; ++i)
        text += io::csv_line({fmt(grid[i]), fmt(avg[i]), fmt(spread[i])});
    io::write_file_atomic(config.out_dir / "average.csv", text);
    res.outputs.push_back("average.csv");

    json opt;
    opt["eta"] = eta;
    opt["nbar_range"] = {nbar_min, nbar_max};
    try {
        OptimumOptions o;
        o.nbar_min = nbar_min;
        o.nbar_max = nbar_max;
        const auto best = optimal_displacement(eta, o);
        opt["nbar_opt"] = best.nbar;
        opt["relative_rabi"] = best.relative_rabi;
        opt["spread"] = best.spread;
    }
    catch (const SearchError& e) {
        opt["nbar_opt"] = nullptr;
        opt["warning"] = std::string("range limit: ") + e.what();
        res.warnings.push_back(std::string("range limit: ") + e.what());
    }
    write_json(config.out_dir / "optimum.json", opt);
    res.outputs.push_back("optimum.json");
    return res;
}

CommandResult cmd_scan(const RunConfig& config)
{
    const auto protocol = build_protocol(config);
    const auto data = simulate_protocol(protocol);
    write_scan_csv(config.out_dir / "scan.csv", data);
    CommandResult res;
    res.outputs.push_back("scan.csv");
    res.warnings = data.warnings;
    return res;
}

CommandResult cmd_spectrum(const RunConfig& config)
{
    const auto node = config.section("spectrum");
    YAML::Node sec = node ? node : YAML::Node(YAML::NodeType::Map);
    check_keys(sec, "spectrum", {"input", "model", "fit_amplitude", "gamma"});
    const auto model = get_string(sec, "model", "exponential");
    if (model != "exponential" && model != "damped_cosine")
        fail(sec["model"], "model must be 'exponential' or 'damped_cosine'");
    DetectionFloor floor{get_double(sec, "gamma", 0.9)};
    DampedCosineOptions options;
    options.fit_amplitude = get_bool(sec, "fit_amplitude", false);

    CommandResult res;
    ScanDataset data;
    if (sec["input"]) {
        auto path = fs::path(get_string(sec, "input", ""));
        if (path.is_relative())
            path = config.base_dir / path;
        data = read_scan_csv(path);
    }
    else {
        data = simulate_protocol(build_protocol(config));
        write_scan_csv(config.out_dir / "scan.csv", data);
        res.outputs.push_back("scan.csv");
        res.warnings = data.warnings;
    }
    const auto fits =
        fit_scan(data, model == "exponential" ? FitChoice::Exponential : FitChoice::DampedCosine, options);
    json report;
    report["gamma_per_s"] = floor.gamma;
    report["fits"] = json::array();
    SpectrumEstimate spectrum;
    try {
        spectrum = reconstruct_spectrum(fits, floor);
    }
    catch (const NumericalError&) {
        for (const auto& f : fits)
            report["fits"].push_back(fit_json(f, nullptr));
        write_json(config.out_dir / "fits.json", report);
        throw;
    }
    for (std::size_t i = 0; i < fits.size(); ++i)
        report["fits"].push_back(fit_json(fits[i], &spectrum.rows[i]));
    write_spectrum_csv(config.out_dir / "spectrum.csv", spectrum);
    write_json(config.out_dir / "fits.json", report);
    res.outputs.push_back("spectrum.csv");
    res.outputs.push_back("fits.json");
    return res;
}

CommandResult cmd_demo_figures(const RunConfig& config)
{
    const auto node = config.section("demo");
    YAML::Node sec = node ? node : YAML::Node(YAML::NodeType::Map);
    check_keys(sec, "demo", {"shots", "trajectories", "step_factor", "spectrum_points"});
    const auto shots = get_u64(sec, "shots", 150);
    const auto n_traj = get_u64(sec, "trajectories", 16);
    const double step = get_double(sec, "step_factor", 0.05);
    const auto n_spec = get_u64(sec, "spectrum_points", 12);
    if (shots < 1 || n_traj < 1 || n_spec < 2 || !(step > 0.0 && step < 0.1))
        fail(sec, "demo needs shots >= 1, trajectories >= 1, spectrum_points >= 2, 0 < step_factor < 0.1");
    CommandResult res;
    const fs::path out = config.out_dir;

    // Decay at three noise levels.
    {
        const double omega = hz(1000.0);
        const auto t = linspace(0.0, 0.02, 41);
        std::string text = "S_phi,t_s,sx_analytic,sx_ensemble,sx_stderr\n";
        std::size_t k = 0;
        for (double rate : {50.0, 100.0, 200.0}) {
            const double s = 2.0 * rate / (omega * omega);
            DriveConfig drive;
            drive.rabi = omega;
            drive.dt = step / omega;
            const auto rec = ensemble_average(drive, PsdModel::white(s), {}, n_traj, derive_seed(config.seed, k++), t,
                                              config.threads);
            for (std::size_t i = 0; i < t.size(); ++i)
                text += io::csv_line({fmt(s), fmt(t[i]), fmt(combined_sigma_x(omega, 0.0, s, t[i])), fmt(rec.sx[i]),
                                      fmt(rec.se_sx[i])});
        }
        io::write_file_atomic(out / "decay_curves.csv", text);
        res.outputs.push_back("decay_curves.csv");
    }

    // Couplings and the coherent-state average.
    {
        const double eta = 0.038;
        write_coupling_csv(out / "sideband_coupling.csv", coupling_table(eta, 1500));
        const auto grid = linspace(0.0, 1500.0, 151);
        std::string text = "nbar,average_rabi,spread\n";
        for (double nb : grid)
            text += io::csv_line({fmt(nb), fmt(average_sideband_rabi(eta, nb)), fmt(rabi_spread(eta, nb))});
        io::write_file_atomic(out / "displacement_average.csv", text);
        const auto best = optimal_displacement(eta);
        json j;
        j["eta"] = eta;
        j["nbar_opt"] = best.nbar;
        j["relative_rabi"] = best.relative_rabi;
        j["spread"] = best.spread;
        write_json(out / "displacement_optimum.json", j);
        res.outputs.insert(res.outputs.end(), {"sideband_coupling.csv", "displacement_average.csv", "displacement_optimum.json"});
    }

    // Spectrum of a synthetic omega^-1.5 frequency-noise background with one coherent tone.
    {
        ParametricPsd bg;
        const double ref = hz(200.0);
        bg.background_amplitude = 80.0 / (ref * ref);
        bg.background_exponent = -3.5;
        bg.reference_frequency = ref;
        bg.background_band = std::pair{hz(200.0), hz(5000.0)};
        ProtocolConfig p;
        p.rabi = logspace(hz(250.0), hz(4000.0), n_spec);
        p.noise = PsdModel(bg);
        p.shots = shots;
        p.trajectories = n_traj;
        p.step_factor = std::max(step, 0.09);
        p.seed = derive_seed(config.seed, 100);
        p.threads = config.threads;
        for (double w : p.rabi) {
            const double rate = 0.5 * w * w * evaluate_psd(p.noise, w);
            p.times.push_back(linspace(0.0, std::min(1.5 / rate, 4.0), 80));
        }
        const double tone_omega = p.rabi[n_spec / 2];
        p.modulation.tones.push_back({tone_omega, 0.04, 0.0});
        const auto data = simulate_protocol(p);
        write_scan_csv(out / "spectrum_scan.csv", data);
        const auto fits = fit_scan(data, FitChoice::DampedCosine);
        const auto spectrum = reconstruct_spectrum(fits, DetectionFloor{0.9});
        write_spectrum_csv(out / "spectrum.csv", spectrum);
        json report;
        report["injected_tone"] = {{"omega_rad_s", tone_omega},
                                   {"beta_rad", p.modulation.tones[0].beta},
                                   {"delta_nu_Hz", frequency_modulation_depth(p.modulation.tones[0].beta, tone_omega)}};
        report["fits"] = json::array();
        for (std::size_t i = 0; i < fits.size(); ++i)
            report["fits"].push_back(fit_json(fits[i], &spectrum.rows[i]));
        write_json(out / "spectrum_fits.json", report);

        std::string text = "omega_rad_s,t_s,sx_mean,sx_stderr,sx_fit\n";
        for (const auto& row : data.rows) {
            const auto it = std::find_if(fits.begin(), fits.end(), [&](const OmegaFit& f) { return f.omega == row.omega; });
            const double fit = it->fit.amplitude * std::cos(0.5 * it->fit.beta * row.omega * row.t) *
                               std::exp(-it->fit.rate * row.t);
            text += io::csv_line({fmt(row.omega), fmt(row.t), fmt(row.sx_mean), fmt(row.sx_stderr), fmt(fit)});
        }
        io::write_file_atomic(out / "spectrum_evolution.csv", text);
        res.outputs.insert(res.outputs.end(),
                           {"spectrum_scan.csv", "spectrum.csv", "spectrum_evolution.csv", "spectrum_fits.json"});
        res.warnings.insert(res.warnings.end(), data.warnings.begin(), data.warnings.end());
    }

    // Bloch components under a resonant tone, 150 shots per point.
    {
        const double omega = hz(5000.0);
        const double beta = 0.2;
        const double delta = 1.48;
        const auto t = linspace(0.0, 2e-3, 81);
        DriveConfig drive;
        drive.rabi = omega;
        drive.dt = 0.01 / omega;
        drive.frame = Frame::Drive;
        PhaseSignal signal;
        signal.modulation.tones.push_back({omega, beta, delta});
        const auto rec = propagate_trajectory(drive, signal, t);
        const auto theory = coherent_evolution(omega, beta, delta, t);
        std::mt19937_64 rng(derive_seed(config.seed, 200));
        auto measure = [&](double s, double& err) {
            std::binomial_distribution<std::size_t> b(shots, std::clamp(0.5 * (1.0 + s), 0.0, 1.0));
            const double p = static_cast<double>(b(rng)) / static_cast<double>(shots);
            err = 2.0 * std::sqrt(std::max(p * (1.0 - p), 0.25 / static_cast<double>(shots)) /
                                  static_cast<double>(shots));
            return 2.0 * p - 1.0;
        };
        std::vector<double> sy(t.size()), sz(t.size()), err(t.size());
        std::string text = "t_s,sx,sy,sz,sx_err,sy_err,sz_err,sx_theory,sy_theory,sz_theory\n";
        for (std::size_t i = 0; i < t.size(); ++i) {
            double ex = 0, ey = 0, ez = 0;
            const double mx = measure(rec.sx[i], ex);
            sy[i] = measure(rec.sy[i], ey);
            sz[i] = measure(rec.sz[i], ez);
            err[i] = std::max(ey, ez);
            text += io::csv_line({fmt(t[i]), fmt(mx), fmt(sy[i]), fmt(sz[i]), fmt(ex), fmt(ey), fmt(ez),
                                  fmt(theory.sx[i]), fmt(theory.sy[i]), fmt(theory.sz[i])});
        }
        io::write_file_atomic(out / "tone_bloch.csv", text);
        const auto fit = fit_coherent_phase(t, sy, sz, err, omega);
        json j;
        j["omega_rad_s"] = omega;
        j["beta_injected"] = beta;
        j["delta_injected"] = delta;
        j["fit_success"] = fit.success;
        j["beta_fit"] = fit.beta;
        j["beta_se"] = number_or_null(fit.beta_se);
        j["delta_fit"] = fit.delta;
        j["delta_se"] = number_or_null(fit.delta_se);
        write_json(out / "tone_fit.json", j);
        res.outputs.insert(res.outputs.end(), {"tone_bloch.csv", "tone_fit.json"});
    }
    return res;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Spin-locking noise spectroscopy simulator", "spinlock"};
    app.require_subcommand(1);
    app.set_version_flag("--version", SPINLOCK_VERSION);

    std::string config_path;
    Overrides overrides;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::string out_dir;

    struct Entry {
        const char* name;
        const char* help;
        CommandResult (*fn)(const RunConfig&);
    };
    const Entry entries[] = {
        {"synthesize", "Synthesize phase-noise trajectories and their PSD estimate", cmd_synthesize},
        {"coupling", "Sideband coupling table and optimal displacement", cmd_coupling},
        {"scan", "Simulate a spin-locking scan over Rabi frequencies", cmd_scan},
        {"spectrum", "Fit a scan and reconstruct the noise spectrum", cmd_spectrum},
        {"demo-figures", "Write figure-ready CSV bundles from synthetic inputs", cmd_demo_figures},
    };
    std::vector<CLI::Option*> seed_opts, thread_opts, out_opts;
    for (const auto& e : entries) {
        auto* sub = app.add_subcommand(e.name, e.help);
        sub->add_option("--config,-c", config_path, "YAML configuration file");
        seed_opts.push_back(sub->add_option("--seed", seed, "Master seed (overrides config)"));
        thread_opts.push_back(sub->add_option("--threads", threads, "Worker threads (overrides config)"));
        out_opts.push_back(sub->add_option("--out,-o", out_dir, "Output directory (overrides config)"));
    }

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInput;
    }

    const Entry* chosen = nullptr;
    std::size_t index = 0;
    for (std::size_t i = 0; i < std::size(entries); ++i) {
        if (app.got_subcommand(entries[i].name)) {
            chosen = &entries[i];
            index = i;
        }
    }
    if (seed_opts[index]->count())
        overrides.seed = seed;
    if (thread_opts[index]->count())
        overrides.threads = threads;
    if (out_opts[index]->count())
        overrides.out_dir = out_dir;

    const auto start = std::chrono::steady_clock::now();
    RunConfig config;
    try {
        config = load_config(config_path, overrides);
    }
    catch (const InputError& e) {
        err << "spinlock: " << e.what() << "\n";
        return kExitInput;
    }
    catch (const YAML::Exception& e) {
        err << "spinlock: config: " << e.what() << "\n";
        return kExitInput;
    }

    json manifest;
    manifest["tool"] = "spinlock";
    manifest["version"] = SPINLOCK_VERSION;
    manifest["command"] = chosen->name;
    manifest["config"] = config_path;
    manifest["seed"] = config.seed;
    manifest["threads"] = config.threads;
    manifest["resolved_config"] = "resolved_config.yaml";

    int code = kExitOk;
    CommandResult result;
    try {
        result = chosen->fn(config);
        manifest["status"] = "ok";
    }
    catch (const InputError& e) {
        err << "spinlock " << chosen->name << ": " << e.what() << "\n";
        return kExitInput;
    }
    catch (const YAML::Exception& e) {
        err << "spinlock " << chosen->name << ": config: " << e.what() << "\n";
        return kExitInput;
    }
    catch (const NumericalError& e) {
        err << "spinlock " << chosen->name << ": numerical failure: " << e.what() << "\n";
        manifest["status"] = "numerical_failure";
        manifest["error"] = e.what();
        code = kExitNumerical;
    }
    for (const auto& w : result.warnings)
        err << "spinlock " << chosen->name << ": warning: " << w << "\n";
    manifest["outputs"] = result.outputs;
    manifest["warnings"] = result.warnings;
    manifest["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    try {
        io::write_file_atomic(config.out_dir / "resolved_config.yaml", resolved_yaml(config));
        write_json(config.out_dir / "manifest.json", manifest);
    }
    catch (const Error& e) {
        err << "spinlock: " << e.what() << "\n";
        return kExitInput;
    }
    if (code == kExitOk)
        out << "spinlock " << chosen->name << ": wrote " << result.outputs.size() << " file(s) to "
            << config.out_dir.string() << "\n";
    return code;
}

} // namespace spinlock::cli
