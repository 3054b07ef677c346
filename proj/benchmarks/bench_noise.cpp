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
#include "spinlock/noise.hpp"

#include <benchmark/benchmark.h>

using namespace spinlock;

namespace {

void BM_Synthesize(benchmark::State& state)
{
    const auto model = PsdModel::power_law(1e-9, -1.5, kTwoPi * 1000.0, std::pair{kTwoPi * 20.0, kTwoPi * 2e4});
    const double dt = 1e-5;
    const double duration = dt * static_cast<double>(state.range(0));
    std::uint64_t seed = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(synthesize_trajectory(model, duration, dt, ++seed));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Synthesize)->RangeMultiplier(8)->Range(1 << 10, 1 << 22)->Unit(benchmark::kMillisecond);

void BM_EstimatePsd(benchmark::State& state)
{
    const auto model = PsdModel::white(1e-8);
    std::vector<NoiseTrajectory> traj;
    for (std::uint64_t i = 0; i < 16; ++i)
        traj.push_back(synthesize_trajectory(model, 1e-5 * static_cast<double>(state.range(0)), 1e-5, i));
    for (auto _ : state)
        benchmark::DoNotOptimize(estimate_psd(traj));
}
BENCHMARK(BM_EstimatePsd)->Arg(1 << 12)->Arg(1 << 16)->Unit(benchmark::kMillisecond);

} // namespace
