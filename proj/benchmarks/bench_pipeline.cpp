// SPDX-License-Identifier: Apache-2.0
//
// chansound - wideband channel sounding post-processing and statistics
// Copyright (C) 2026 The chansound Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
#include "chansound/geometry.hpp"
#include "chansound/pathloss_fit.hpp"
#include "chansound/pipeline.hpp"
#include "chansound/stats.hpp"
#include "chansound/synth.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

using namespace chansound;

namespace
{

std::vector<cplx> multipath_response(const WaveformSpec &spec)
{
    const std::vector<PropagationPath> paths{{200e-9, 1e-4, PathType::direct},
                                             {230e-9, cplx(0.0, 5e-5), PathType::reflection},
                                             {410e-9, -2e-5, PathType::reflection}};
    return transfer_function(paths, spec);
}

void BM_ComputePdp(benchmark::State &state)
{
    const WaveformSpec spec;
    const auto H = multipath_response(spec);
    const PreprocessConfig cfg{3.0, static_cast<std::size_t>(state.range(0))};
    for (auto _ : state)
        benchmark::DoNotOptimize(compute_pdp(window_and_pad(H, spec, cfg)));
}
BENCHMARK(BM_ComputePdp)->Arg(1)->Arg(10)->Unit(benchmark::kMicrosecond);

void BM_QParameters(benchmark::State &state)
{
    std::mt19937_64 rng(1);
    std::exponential_distribution<double> draw(1.0);
    std::vector<double> p(static_cast<std::size_t>(state.range(0)));
    for (std::size_t i = 0; i < p.size(); ++i)
        p[i] = draw(rng) * std::exp(-0.05 * static_cast<double>(i));
    for (auto _ : state)
    {
        benchmark::DoNotOptimize(q_window(p, 10.0));
        benchmark::DoNotOptimize(q_tap(p, 10.0));
    }
}
BENCHMARK(BM_QParameters)->Arg(120)->Arg(1200);

void BM_FitPathloss(benchmark::State &state)
{
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> dist(20.0, 260.0);
    std::normal_distribution<double> shadow(0.0, 6.0);
    std::vector<PathGainSample> samples(3000);
    for (auto &s : samples)
    {
        s.distance = dist(rng);
        const double pl = 35.0 * std::log10(s.distance) + 30.0 + shadow(rng);
        s.censored = pl > 110.0;
        s.path_gain = s.censored ? 0.0 : from_db(-pl);
        s.ceiling = from_db(-110.0);
    }
    PathlossFitOptions opt;
    opt.bootstrap = static_cast<std::size_t>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(fit_pathloss(samples, LosState::los, opt));
}
BENCHMARK(BM_FitPathloss)->Arg(0)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_AssessLink(benchmark::State &state)
{
    Scenario sc;
    for (int b = 0; b < state.range(0); ++b)
    {
        const double x = 30.0 * (b % 10), y = 20.0 + 30.0 * (b / 10);
        sc.buildings.push_back({{{x, y}, {x + 20.0, y}, {x + 20.0, y + 15.0}, {x, y + 15.0}}, 25.0});
    }
    const Vec3 ap{-10.0, 0.0, 12.0};
    std::size_t i = 0;
    for (auto _ : state)
    {
        const Vec3 ue{static_cast<double>(i % 300), 10.0 + static_cast<double>(i % 97) * 3.0, 1.5};
        benchmark::DoNotOptimize(assess_link(sc, ap, ue));
        ++i;
    }
}
BENCHMARK(BM_AssessLink)->Arg(10)->Arg(100);

} // namespace

BENCHMARK_MAIN();
