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

#include "config.hpp"

#include "spinlock/io.hpp"

#include <algorithm>
#include <cmath>

namespace spinlock::cli {

namespace {

std::string where(const YAML::Node& node)
{
    const auto mark = node.Mark();
    if (mark.line < 0)
        return "";
    return " (line " + std::to_string(mark.line + 1) + ", column " + std::to_string(mark.column + 1) + ")";
}

template <class T>
T scalar_as(const YAML::Node& node, const std::string& key, const char* type)
{
    if (!node.IsScalar())
        fail(node, "'" + key + "' must be a " + type);
    try {
        return node.as<T>();
    }
    catch (const YAML::Exception&) {
        fail(node, "'" + key + "' must be a " + type + ", got '" + node.Scalar() + "'");
    }
}

} // namespace

void fail(const YAML::Node& node, const std::string& what) { throw ConfigError("config: " + what + where(node)); }

void check_keys(const YAML::Node& node, std::string_view section, std::initializer_list<std::string_view> allowed)
{
    if (!node.IsMap())
        fail(node, "section '" + std::string(section) + "' must be a mapping");
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            std::string list;
            for (auto a : allowed)
                list += (list.empty() ? "" : ", ") + std::string(a);
            fail(kv.first, "unknown key '" + key + "' in '" + std::string(section) + "' (allowed: " + list + ")");
        }
    }
}

double get_double(const YAML::Node& map, const std::string& key, double fallback)
{
    const auto n = map[key];
    if (!n)
        return fallback;
    const double v = scalar_as<double>(n, key, "number");
    if (!std::isfinite(v))
        fail(n, "'" + key + "' must be finite");
    return v;
}

double require_double(const YAML::Node& map, const std::string& key)
{
    if (!map[key])
        fail(map, "missing required key '" + key + "'");
    return get_double(map, key, 0.0);
}

std::uint64_t get_u64(const YAML::Node& map, const std::string& key, std::uint64_t fallback)
{
    const auto n = map[key];
    if (!n)
        return fallback;
    if (n.IsScalar() && !n.Scalar().empty() && n.Scalar().front() == '-')
        fail(n, "'" + key + "' must be a non-negative integer");
    return scalar_as<std::uint64_t>(n, key, "non-negative integer");
}

bool get_bool(const YAML::Node& map, const std::string& key, bool fallback)
{
    const auto n = map[key];
    return n ? scalar_as<bool>(n, key, "boolean") : fallback;
}

std::string get_string(const YAML::Node& map, const std::string& key, const std::string& fallback)
{
    const auto n = map[key];
    return n ? scalar_as<std::string>(n, key, "string") : fallback;
}

PsdModel parse_noise(const YAML::Node& node, const std::filesystem::path& base)
{
    if (!node || node.IsNull())
        return {};
    check_keys(node, "noise", {"white", "power_law", "peaks", "table", "scale"});
    std::vector<PsdComponent> parts;
    ParametricPsd p;
    p.white_floor = get_double(node, "white", 0.0);
    if (const auto pl = node["power_law"]) {
        check_keys(pl, "noise.power_law", {"amplitude", "exponent", "reference_hz", "band_hz", "quantity"});
        p.background_amplitude = require_double(pl, "amplitude");
        p.background_exponent = require_double(pl, "exponent");
        p.reference_frequency = hz(require_double(pl, "reference_hz"));
        const auto quantity = get_string(pl, "quantity", "phase");
        if (quantity == "frequency") {
            // S_phi = S_nu / w^2
            p.background_amplitude /= p.reference_frequency * p.reference_frequency;
            p.background_exponent -= 2.0;
        }
        else if (quantity != "phase") {
            fail(pl["quantity"], "quantity must be 'phase' or 'frequency'");
        }
        if (const auto band = pl["band_hz"]) {
            if (!band.IsSequence() || band.size() != 2)
                fail(band, "band_hz must be a two-element list [low, high]");
            p.background_band = std::pair{hz(scalar_as<double>(band[0], "band_hz", "number")),
                                          hz(scalar_as<double>(band[1], "band_hz", "number"))};
        }
    }
    if (const auto peaks = node["peaks"]) {
        if (!peaks.IsSequence())
            fail(peaks, "peaks must be a list");
        for (const auto& pk : peaks) {
            check_keys(pk, "noise.peaks[]", {"center_hz", "height", "width_hz"});
            p.peaks.push_back({hz(require_double(pk, "center_hz")), require_double(pk, "height"),
                               hz(require_double(pk, "width_hz"))});
        }
    }
    parts.emplace_back(p);
    if (const auto table = node["table"]) {
        auto path = std::filesystem::path(scalar_as<std::string>(table, "table", "path"));
        if (path.is_relative())
            path = base / path;
        parts.emplace_back(read_psd_csv(path));
    }
    PsdModel model(std::move(parts));
    const double scale = get_double(node, "scale", 1.0);
    if (scale < 0.0)
        fail(node["scale"], "scale must be >= 0");
    model = model.scaled(scale);
    try {
        model.validate();
    }
    catch (const InputError& e) {
        fail(node, e.what());
    }
    return model;
}

ModulationSpec parse_modulation(const YAML::Node& node)
{
    ModulationSpec spec;
    if (!node || node.IsNull())
        return spec;
    if (!node.IsSequence())
        fail(node, "modulation must be a list of tones");
    for (const auto& tone : node) {
        check_keys(tone, "modulation[]", {"frequency_hz", "beta", "phase"});
        spec.tones.push_back({hz(require_double(tone, "frequency_hz")), require_double(tone, "beta"),
                              get_double(tone, "phase", 0.0)});
    }
    try {
        spec.validate();
    }
    catch (const InputError& e) {
        fail(node, e.what());
    }
    return spec;
}

std::vector<double> parse_grid(const YAML::Node& node, const std::string& what)
{
    std::vector<double> out;
    if (node.IsSequence()) {
        for (const auto& v : node)
            out.push_back(scalar_as<double>(v, what, "number"));
        return out;
    }
    check_keys(node, what, {"start", "stop", "points", "spacing"});
    const double start = require_double(node, "start");
    const double stop = require_double(node, "stop");
    const auto points = get_u64(node, "points", 10);
    const auto spacing = get_string(node, "spacing", "linear");
    if (points < 1)
        fail(node, what + ": points must be >= 1");
    if (spacing != "linear" && spacing != "log")
        fail(node, what + ": spacing must be 'linear' or 'log'");
    if (spacing == "log" && !(start > 0.0 && stop > 0.0))
        fail(node, what + ": log spacing needs positive start and stop");
    for (std::size_t i = 0; i < points; ++i) {
        const double f = points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(points - 1);
        out.push_back(spacing == "log" ? start * std::pow(stop / start, f) : start + f * (stop - start));
    }
    return out;
}

TimeGridSpec parse_times(const YAML::Node& node)
{
    TimeGridSpec spec;
    if (!node)
        fail(node, "scan needs 'times_s'");
    if (node.IsSequence()) {
        spec.fixed = parse_grid(node, "times_s");
        return spec;
    }
    check_keys(node, "times_s", {"start", "stop", "points", "target_exponent", "min_stop", "max_stop"});
    spec.start = get_double(node, "start", 0.0);
    spec.points = get_u64(node, "points", 20);
    if (node["stop"])
        spec.stop = require_double(node, "stop");
    if (node["target_exponent"])
        spec.target_exponent = require_double(node, "target_exponent");
    spec.min_stop = get_double(node, "min_stop", 0.0);
    spec.max_stop = get_double(node, "max_stop", 0.0);
    if (spec.stop.has_value() == spec.target_exponent.has_value())
        fail(node, "times_s needs exactly one of 'stop' and 'target_exponent'");
    if (spec.points < 2)
        fail(node, "times_s: points must be >= 2");
    return spec;
}

YAML::Node RunConfig::section(const std::string& name) const
{
    if (!root || !root.IsMap())
        return YAML::Node();
    return root[name];
}

RunConfig load_config(const std::filesystem::path& path, const Overrides& overrides)
{
    RunConfig cfg;
    if (!path.empty()) {
        std::string text;
        try {
            text = io::read_file(path);
        }
        catch (const InputError& e) {
            throw ConfigError(std::string("config: ") + e.what());
        }
        try {
            cfg.root = YAML::Load(text);
        }
        catch (const YAML::ParserException& e) {
            throw ConfigError("config: " + path.string() + ": " + e.what());
        }
        cfg.base_dir = path.parent_path();
    }
    if (!cfg.root || cfg.root.IsNull())
        cfg.root = YAML::Node(YAML::NodeType::Map);
    check_keys(cfg.root, "top level",
               {"seed", "threads", "output", "noise", "modulation", "synthesize", "coupling", "scan", "spectrum",
                "demo"});
    cfg.seed = get_u64(cfg.root, "seed", 1);
    cfg.threads = static_cast<unsigned>(get_u64(cfg.root, "threads", 1));
    if (cfg.root["output"])
        cfg.out_dir = get_string(cfg.root, "output", "");
    if (overrides.seed)
        cfg.seed = *overrides.seed;
    if (overrides.threads)
        cfg.threads = *overrides.threads;
    if (overrides.out_dir)
        cfg.out_dir = *overrides.out_dir;
    cfg.noise = parse_noise(cfg.root["noise"], cfg.base_dir);
    cfg.modulation = parse_modulation(cfg.root["modulation"]);
    return cfg;
}

std::string resolved_yaml(const RunConfig& config)
{
    YAML::Node copy = YAML::Clone(config.root);
    copy["seed"] = config.seed;
    copy["threads"] = config.threads;
    copy["output"] = config.out_dir.string();
    auto absolute = [&](const char* section, const char* key) {
        auto node = copy[section];
        if (!node || !node.IsMap() || !node[key])
            return;
        auto path = std::filesystem::path(node[key].as<std::string>());
        if (path.is_relative())
            path = std::filesystem::absolute(config.base_dir / path);
        node[key] = path.string();
    };
    absolute("noise", "table");
    absolute("spectrum", "input");
    YAML::Emitter em;
    em.SetDoublePrecision(17);
    em << copy;
    return std::string(em.c_str()) + "\n";
}

} // namespace spinlock::cli
