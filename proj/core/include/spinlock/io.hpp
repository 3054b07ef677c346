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

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace spinlock::io {

/// Shortest round-trip decimal representation (locale independent).
std::string format_double(double value);

/// Writes `contents` to `path` through a temporary sibling and a rename, so readers
/// never observe a partially written file. Creates parent directories.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

/// Comma separated table with a header row. Empty lines and lines starting with '#' are skipped.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of `name` in the header; throws InputError if absent.
    std::size_t column(std::string_view name) const;
};

CsvTable parse_csv(std::string_view text);

/// Parses a full-field double; throws InputError naming `what` on failure.
double parse_double(std::string_view field, std::string_view what);

/// Joins fields with commas and a trailing newline.
std::string csv_line(const std::vector<std::string>& fields);

} // namespace spinlock::io
