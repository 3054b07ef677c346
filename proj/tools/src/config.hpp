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
#include "spinlock/noise.hpp"
#include "spinlock/spectroscopy.hpp"

#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace spinlock::cli {

/// Malformed or inconsistent configuration; message carries line and column.
class ConfigError : public InputError {
public:
    using InputError::InputError;
};

[[noreturn]] void fail(const YAML::Node& node, const std::string& what);

/// Throws ConfigError for a non-map node or keys outside `allowed`.
void check_keys(const YAML::Node& node, std::string_view section, std::initializer_list<std::string_view> allowed);

double get_double(const YAML::Node& map, const std::string& key, double fallback);
double require_double(const YAML::Node& map, const std::string& key);
std::uint64_t get_u64(const YAML::Node& map, const std::string& key, std::uint64_t fallback);
bool get_bool(const YAML::Node& map, const std::string& key, bool fallback);
std::string get_string(const YAML::Node& map, const std::string& key, const std::string& fallback);

/// Hz values to rad/s.
inline double hz(double f) { return kTwoPi * f; }

/// Noise section; frequencies in Hz, densities two-sided per rad/s. Relative table
/// paths resolve against `base`.
PsdModel parse_noise(const YAML::Node& node, const std::filesystem::path& base);
ModulationSpec parse_modulation(const YAML::Node& node);

/// List [a, b, ...] or {start, stop, points, spacing: linear|log}.
std::vector<double> parse_grid(const YAML::Node& node, const std::string& what);

struct TimeGridSpec {
    std::vector<double> fixed;           ///< explicit grid, s
    std::optional<double> stop;          ///< s
    double start = 0.0;
    std::size_t points = 20;
    std::optional<double> target_exponent;
    double min_stop = 0.0;
    double max_stop = 0.0;               ///< 0 = unbounded
};

TimeGridSpec parse_times(const YAML::Node& node);

/// Loaded configuration plus overrides from the command line.
struct RunConfig {
    YAML::Node root;
    std::filesystem::path base_dir;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::filesystem::path out_dir = "spinlock_out";
    PsdModel noise;
    ModulationSpec modulation;

    YAML::Node section(const std::string& name) const;
};

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::filesystem::path> out_dir;
};

/// Parses and validates the top level. An empty path yields an empty configuration.
RunConfig load_config(const std::filesystem::path& path, const Overrides& overrides);

/// YAML text of the configuration with overrides applied.
std::string resolved_yaml(const RunConfig& config);

} // namespace spinlock::cli
