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

#include "chansound/fft.hpp"
#include "chansound/waveform.hpp"

#include "test_support.hpp"

#include <catch_amalgamated.hpp>

#include <nlohmann/json.hpp>

#include <cstring>

using namespace chansound;
using Catch::Approx;

namespace
{

// Direct evaluation of one oversampled period, independent of the FFT path.
std::vector<cplx> direct_period(const std::vector<double> &phases, std::size_t oversample)
{
    const std::size_t n = phases.size();
    const std::size_t L = n * oversample;
    std::vector<cplx> x(L);
    for (std::size_t t = 0; t < L; ++t)
    {
        cplx acc{0.0, 0.0};
        for (std::size_t k = 0; k < n; ++k)
        {
            const double o = static_cast<double>(static_cast<long>(k) - static_cast<long>(n / 2));
            acc += std::polar(1.0, phases[k] + 2.0 * pi * o * static_cast<double>(t) / static_cast<double>(L));
        }
        x[t] = acc / std::sqrt(static_cast<double>(n));
    }
    return x;
}

double direct_papr_db(const std::vector<cplx> &x)
{
    double peak = 0.0, mean = 0.0;
    for (const auto &v : x)
    {
        peak = std::max(peak, std::norm(v));
        mean += std::norm(v);
    }
    return 10.0 * std::log10(peak / (mean / static_cast<double>(x.size())));
}

} // namespace

TEST_CASE("sounding numerology", "[waveform]")
{
    WaveformSpec spec; // 2801 tones, 125 kHz
    CHECK(spec.duration() == Approx(8e-6).epsilon(1e-15));
    CHECK(spec.bandwidth() == Approx(350e6).epsilon(1e-15));
    CHECK(std::abs(spec.bandwidth() - 2801 * 125e3) <= spec.subcarrier_spacing);
    CHECK(spec.resolvable_delay() == Approx(2.857142857e-9).epsilon(1e-9));
    CHECK(spec.resolvable_delay() * speed_of_light == Approx(0.857).margin(1e-3));
    // c * 8 us = 2398.3 m; quoted as 2400 m
    CHECK(spec.unambiguous_range() == Approx(2400.0).epsilon(1e-3));
}

TEST_CASE("phase rules", "[waveform]")
{
    const std::size_t n = 37;
    const auto newman = multitone_phases(n, PhaseRule::newman);
    const auto quad = multitone_phases(n, PhaseRule::quadratic);
    for (std::size_t k = 0; k < n; ++k)
    {
        const double kk = static_cast<double>(k);
        CHECK(std::remainder(newman[k] - pi * kk * kk / n, 2.0 * pi) == Approx(0.0).margin(1e-12));
        CHECK(std::remainder(quad[k] - pi * kk * (kk + 1) / n, 2.0 * pi) == Approx(0.0).margin(1e-12));
    }
    CHECK_THROWS(multitone_phases(0, PhaseRule::newman));
    const std::vector<double> wrong(3, 0.0);
    CHECK_THROWS(multitone_phases(4, PhaseRule::user, wrong));
    CHECK_THROWS_AS(phase_rule_from_string("nope"), ConfigError);
}

TEST_CASE("multitone generation", "[waveform]")
{
    SECTION("zero subcarriers")
    {
        WaveformSpec spec;
        spec.n_subcarriers = 0;
        CHECK_THROWS(generate_multitone(spec));
        CHECK_THROWS_AS(spec.validate(), ConfigError);
    }
    SECTION("single tone is constant envelope")
    {
        WaveformSpec spec;
        spec.n_subcarriers = 1;
        const auto w = generate_multitone(spec, PhaseRule::newman, {}, 8);
        CHECK(papr_db(w.time_samples) == Approx(0.0).margin(1e-12));
    }
    SECTION("time samples match a direct evaluation")
    {
        WaveformSpec spec;
        spec.n_subcarriers = 31;
        const auto w = generate_multitone(spec, PhaseRule::newman, {}, 4);
        const auto ref = direct_period(w.subcarrier_phases, 4);
        REQUIRE(w.time_samples.size() == ref.size());
        for (std::size_t i = 0; i < ref.size(); ++i)
            CHECK(std::abs(w.time_samples[i] - ref[i]) < 1e-12);
    }
    SECTION("FFT of one period recovers the flat spectrum")
    {
        WaveformSpec spec; // full 2801 tones
        const auto w = generate_multitone(spec);
        const auto X = fft_to_centered_order(fft_forward(w.time_samples));
        const double scale = 1.0 / std::sqrt(static_cast<double>(spec.n_subcarriers));
        const auto S = w.spectrum();
        for (std::size_t k = 0; k < S.size(); ++k)
        {
            CHECK(std::abs(S[k]) == Approx(1.0).epsilon(1e-15));
            CHECK(std::abs(X[k] * scale - S[k]) < 1e-9);
        }
    }
}

TEST_CASE("PAPR", "[waveform]")
{
    SECTION("two equal tones in phase")
    {
        const std::vector<double> zero(2, 0.0);
        CHECK(papr_db(synthesize_period(zero, 16)) == Approx(10.0 * std::log10(2.0)).margin(1e-9));
        CHECK(papr_db(synthesize_period(zero, 16)) == Approx(3.01).margin(0.005));
    }
    SECTION("Newman phasing for 64 tones, dense search")
    {
        WaveformSpec spec;
        spec.n_subcarriers = 64;
        const auto w = generate_multitone(spec);
        const double oracle = direct_papr_db(direct_period(w.subcarrier_phases, 64));
        CHECK(papr_db(w, 64) == Approx(oracle).margin(1e-9));
        CHECK(oracle < 6.0);
    }
    SECTION("Newman beats in-phase tones at full size")
    {
        WaveformSpec spec;
        const auto newman = generate_multitone(spec, PhaseRule::newman);
        const auto zero = generate_multitone(spec, PhaseRule::zero);
        const double pn = papr_db(newman, 4);
        const double pz = papr_db(zero, 4);
        CHECK(pn < pz);
        CHECK(pz == Approx(10.0 * std::log10(2801.0)).margin(0.01));
    }
    SECTION("invariance and oversampling monotonicity")
    {
        WaveformSpec spec;
        spec.n_subcarriers = 101;
        const auto w = generate_multitone(spec);
        auto x = w.time_samples;
        const double base = papr_db(x);
        for (auto &v : x)
            v *= std::polar(3.7, 1.234);
        CHECK(papr_db(x) == Approx(base).margin(1e-10));

        double prev = -1.0;
        for (std::size_t os : {1, 2, 4, 8, 16, 32})
        {
            const double p = papr_db(w, os);
            CHECK(p >= prev - 1e-12);
            prev = p;
        }
    }
    SECTION("errors")
    {
        CHECK_THROWS(papr_db(std::span<const cplx>{}));
        const SoundingWaveform empty;
        CHECK_THROWS(papr_db(empty, 2));
    }
}

TEST_CASE("waveform export", "[waveform][io]")
{
    WaveformSpec spec;
    spec.n_subcarriers = 16;
    const auto w = generate_multitone(spec, PhaseRule::newman, {}, 2);
    test::TempDir dir;
    export_waveform(w, dir.path() / "wf");
    const auto bin = test::read_file(dir.path() / "wf.bin");
    CHECK(bin.size() == 16 * 2 * 16);
    double re0 = 0.0;
    std::memcpy(&re0, bin.data(), 8);
    CHECK(re0 == w.time_samples[0].real());
    const auto meta = nlohmann::json::parse(test::read_file(dir.path() / "wf.json"));
    CHECK(meta["n_subcarriers"] == 16);
    CHECK(meta["oversample"] == 2);
}

TEST_CASE("waveform spec JSON", "[waveform][io]")
{
    WaveformSpec spec;
    spec.n_subcarriers = 101;
    spec.repetitions_per_burst = 3;
    const auto back = waveform_spec_from_json(waveform_spec_to_json(spec));
    CHECK(back.n_subcarriers == 101);
    CHECK(back.repetitions_per_burst == 3);
    CHECK_THROWS_AS(waveform_spec_from_json({{"subcarrier_spacing", -1.0}}), ConfigError);
}
