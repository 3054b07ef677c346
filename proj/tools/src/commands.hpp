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

#include "config.hpp"

#include "spinlock/spectroscopy.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace spinlock::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumerical = 3;

struct CommandResult {
    std::vector<std::string> outputs;   ///< file names relative to the output directory
    std::vector<std::string> warnings;
};

CommandResult cmd_synthesize(const RunConfig& config);
CommandResult cmd_coupling(const RunConfig& config);
CommandResult cmd_scan(const RunConfig& config);
CommandResult cmd_spectrum(const RunConfig& config);
CommandResult cmd_demo_figures(const RunConfig& config);

/// Protocol described by the 'scan' section.
ProtocolConfig build_protocol(const RunConfig& config);

/// Full command line handling; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace spinlock::cli
