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

#include <benchmark/benchmark.h>

using namespace spinlock;

namespace {

void BM_AverageSidebandRabi(benchmark::State& state)
{
    const double nbar = static_cast<double>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(average_sideband_rabi(0.038, nbar));
}
BENCHMARK(BM_AverageSidebandRabi)->Arg(10)->Arg(610)->Arg(10000)->Unit(benchmark::kMicrosecond);

void BM_RelativeCouplings(benchmark::State& state)
{
    const auto n_max = static_cast<std::size_t>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(relative_couplings(0.038, n_max, 1));
}
BENCHMARK(BM_RelativeCouplings)->Arg(2000)->Arg(20000)->Unit(benchmark::kMicrosecond);

void BM_OptimalDisplacement(benchmark::State& state)
{
    for (auto _ : state)
        benchmark::DoNotOptimize(optimal_displacement(0.038));
}
BENCHMARK(BM_OptimalDisplacement)->Unit(benchmark::kMillisecond);

} // namespace
