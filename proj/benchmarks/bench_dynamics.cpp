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
#include "spinlock/dynamics.hpp"

#include <benchmark/benchmark.h>

#include <vector>

using namespace spinlock;

namespace {

void BM_Propagate(benchmark::State& state)
{
    const double om = kTwoPi * 1000.0;
    DriveConfig drive;
    drive.rabi = om;
    drive.dt = 0.05 / om;
    const std::size_t steps = static_cast<std::size_t>(state.range(0));
    const double t_max = drive.dt * static_cast<double>(steps);
    const auto noise = synthesize_trajectory(PsdModel::power_law(1e-7, 0.0, 1.0, std::pair{0.3 * om, 1.7 * om}),
                                             t_max, drive.dt, 1);
    PhaseSignal signal{&noise, {}};
    const std::vector<double> grid{0.0, 0.5 * t_max, t_max};
    for (auto _ : state)
        benchmark::DoNotOptimize(propagate_trajectory(drive, signal, grid));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Propagate)->RangeMultiplier(10)->Range(1000, 1000000)->Unit(benchmark::kMillisecond);

void BM_Ensemble(benchmark::State& state)
{
    const double om = kTwoPi * 1000.0;
    DriveConfig drive;
    drive.rabi = om;
    drive.dt = 0.05 / om;
    const auto model = PsdModel::power_law(1e-7, 0.0, 1.0, std::pair{0.3 * om, 1.7 * om});
    const std::vector<double> grid{0.0, 0.1, 0.2};
    for (auto _ : state)
        benchmark::DoNotOptimize(ensemble_average(drive, model, {}, static_cast<std::size_t>(state.range(0)), 7, grid));
}
BENCHMARK(BM_Ensemble)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_Cumulant(benchmark::State& state)
{
    const double om = kTwoPi * 1000.0;
    ParametricPsd p;
    p.background_amplitude = 1e-8;
    p.background_exponent = -1.5;
    p.reference_frequency = om;
    p.background_band = std::pair{0.1 * om, 10.0 * om};
    p.peaks.push_back({1.2 * om, 1e-7, 0.01 * om});
    const PsdModel model(p);
    const double t = static_cast<double>(state.range(0)) / om;
    for (auto _ : state)
        benchmark::DoNotOptimize(second_cumulant_integral(om, model, t));
}
BENCHMARK(BM_Cumulant)->Arg(10)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

} // namespace
