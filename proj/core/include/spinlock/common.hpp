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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>

namespace spinlock {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid inputs, malformed files, violated preconditions. The CLI maps these to exit code 2.
class InputError : public Error {
public:
    using Error::Error;
};

/// Mathematically undefined request (e.g. a singular evaluation point).
class DomainError : public InputError {
public:
    using InputError::InputError;
};

/// Quadrature or fit failure. The CLI maps these to exit code 3.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// SplitMix64 finaliser; used to derive independent child seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of child `index` under `master`. Depends only on (master, index), never on scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept
{
    return mix_seed(mix_seed(master) ^ mix_seed(index + 0x632be59bd9b4e019ULL));
}

/// Pairwise (cascade) summation; result is independent of how the input was produced.
double pairwise_sum(std::span<const double> values);

/// Runs body(i) for i in [0, count) on up to `threads` workers (0 = hardware concurrency).
/// Indices are statically partitioned; callers write results into per-index slots.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

} // namespace spinlock
