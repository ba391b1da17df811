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

#include "chansound/pipeline.hpp"
#include "chansound/stats.hpp"
#include "chansound/synth.hpp"

#include "test_support.hpp"

#include <catch_amalgamated.hpp>

#include <numeric>

using namespace chansound;
using Catch::Approx;

TEST_CASE("path gain", "[stats]")
{
    CHECK(path_gain(test::make_pdp({0.0, 3e-7, 0.0}), 10.0, LosState::los).path_gain == 3e-7);
    CHECK(path_gain(test::make_pdp({1e-7, 0.0, 2e-7}), 10.0, LosState::los).path_gain == Approx(3e-7));

    auto empty = test::make_pdp(std::vector<double>(8, 0.0));
    empty.threshold = 1e-9;
    empty.energy_per_peak = 11.5;
    const auto c = path_gain(empty, 50.0, LosState::nlos);
    CHECK(c.censored);
    CHECK(c.path_gain == 0.0);
    CHECK(c.ceiling == Approx(1.15e-8));

    SECTION("free-space link through the full chain")
    {
        const WaveformSpec spec;
        for (double y : {20.0, 80.0, 170.0})
        {
            const auto sc = test::street_scenario(2, {{0.0, y, 1.5}});
            PathSynthConfig pc;
            pc.n_reflections = 0;
            const auto set = synth_paths(sc, 0, 0, 1, pc);
            auto H = transfer_function(set.paths, spec);
            std::mt19937_64 rng(3);
            add_white_noise(H, from_db(-100.0), rng);
            auto pdp = compute_pdp(window_and_pad(H, spec, {3.0, 10}));
            pdp.noise_floor = estimate_noise_floor(pdp).value;
            const auto gated = threshold_and_gate(pdp, {});
            const double friis = std::pow(sc.wavelength() / (4.0 * pi * set.geometry.distance), 2.0);
            CHECK(std::abs(to_db(path_gain(gated, set.geometry.distance, LosState::los).path_gain / friis)) < 0.5);
        }
    }
}

TEST_CASE("path gain window averaging", "[stats]")
{
    std::vector<PathGainSample> s;
    for (std::size_t i = 0; i < 8; ++i)
    {
        PathGainSample p;
        p.track_position = 0.5 * static_cast<double>(i);
        p.distance = 100.0 + static_cast<double>(i);
        p.path_gain = 1e-8 * static_cast<double>(i + 1);
        s.push_back(p);
    }
    // samples 4..7 form the second 2 m window; make it fully censored
    for (std::size_t i = 4; i < 8; ++i)
    {
        s[i].censored = true;
        s[i].path_gain = 0.0;
        s[i].ceiling = 2e-9;
    }
    // one censored member in the first window
    s[1].censored = true;
    s[1].path_gain = 0.0;
    s[1].ceiling = 1e-9;
    const auto avg = average_path_gain(s, 2.0);
    REQUIRE(avg.size() == 2);
    CHECK_FALSE(avg[0].censored);
    CHECK(avg[0].path_gain == Approx((1e-8 + 3e-8 + 4e-8) / 3.0));
    CHECK(avg[0].distance == Approx((100.0 + 102.0 + 103.0) / 3.0));
    CHECK(avg[1].censored);
    CHECK(avg[1].ceiling == Approx(2e-9));
    CHECK_THROWS(average_path_gain(s, 0.0));
}

TEST_CASE("RMS delay spread", "[stats]")
{
    const double dt = 1e-9;
    CHECK(rms_delay_spread(std::vector<double>{0.0, 0.0, 5.0, 0.0}, dt) == 0.0);
    CHECK(rms_delay_spread(std::vector<double>{}, dt) == 0.0);

    SECTION("two equal taps")
    {
        for (std::size_t gap : {1, 7, 40})
        {
            std::vector<double> p(100, 0.0);
            p[10] = 2.0;
            p[10 + gap] = 2.0;
            CHECK(rms_delay_spread(p, dt) == Approx(0.5 * static_cast<double>(gap) * dt).epsilon(1e-12));
        }
    }
    SECTION("exponential profile")
    {
        const double T = 40e-9;
        const double bin = 0.2857e-9;
        std::vector<double> p(static_cast<std::size_t>(20.0 * T / bin));
        for (std::size_t b = 0; b < p.size(); ++b)
            p[b] = std::exp(-static_cast<double>(b) * bin / T);
        CHECK(rms_delay_spread(p, bin) == Approx(T).epsilon(0.05));
    }
    SECTION("scale and translation invariance")
    {
        std::mt19937_64 rng(4);
        std::exponential_distribution<double> e(1.0);
        for (int t = 0; t < 100; ++t)
        {
            std::vector<double> p(64);
            for (auto &v : p)
                v = e(rng) * 1e-9;
            const double ref = rms_delay_spread(p, dt);
            std::vector<double> scaled = p;
            for (auto &v : scaled)
                v *= 1234.5;
            std::vector<double> shifted(37, 0.0);
            shifted.insert(shifted.end(), p.begin(), p.end());
            CHECK(rms_delay_spread(scaled, dt) == Approx(ref).epsilon(1e-9));
            CHECK(rms_delay_spread(shifted, dt) == Approx(ref).epsilon(1e-9));
        }
    }
    SECTION("dynamic-range filter")
    {
        std::size_t kept_20 = 0, kept_0 = 0;
        for (double dr : {5.0, 15.0, 19.99, 20.0, 25.0, 40.0})
        {
            auto p = test::make_pdp({0.0, 1.0, 0.5, 0.1});
            p.noise_floor = from_db(-dr);
            const auto r20 = rms_delay_spread(p, 20.0);
            const auto r0 = rms_delay_spread(p, 0.0);
            CHECK(r20.dynamic_range_db == Approx(dr));
            CHECK(r20.excluded == (dr < 20.0));
            if (r20.excluded)
                CHECK(r20.reason == "low_dynamic_range");
            kept_20 += r20.excluded ? 0 : 1;
            kept_0 += r0.excluded ? 0 : 1;
        }
        CHECK(kept_20 == 3);
        CHECK(kept_20 <= kept_0);
        auto z = test::make_pdp({0.0, 0.0});
        z.noise_floor = 1.0;
        CHECK(rms_delay_spread(z).reason == "empty_pdp");
    }
}

TEST_CASE("Q-window and Q-tap", "[stats][q]")
{
    const double sir90 = to_db(9.0); // gamma = 0.9
    CHECK(sir_to_gamma(sir90) == Approx(0.9).epsilon(1e-15));
    CHECK_THROWS(sir_to_gamma(400.0));

    SECTION("spec examples")
    {
        for (double sir : {0.0, 10.0, 30.0})
        {
            CHECK(q_window(std::vector<double>{0.0, 0.0, 4.0, 0.0}, sir) == 1);
            CHECK(q_tap(std::vector<double>{0.0, 0.0, 4.0, 0.0}, sir) == 1);
        }
        const std::vector<double> uniform(10, 1.0);
        CHECK(q_window(uniform, sir90) == 9);
        CHECK(q_tap(uniform, sir90) == 9);
        CHECK(q_window(std::vector<double>(5, 0.0), 10.0) == 0);
    }
    SECTION("exhaustive oracle on small profiles")
    {
        std::mt19937_64 rng(12);
        std::uniform_int_distribution<int> len(1, 12);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int t = 0; t < 500; ++t)
        {
            std::vector<double> p(static_cast<std::size_t>(len(rng)));
            for (auto &v : p)
                v = u(rng) < 0.4 ? 0.0 : std::pow(10.0, -3.0 * u(rng));
            if (std::accumulate(p.begin(), p.end(), 0.0) == 0.0)
                p[0] = 1.0;
            for (double sir : {5.0, 10.0, 15.0})
            {
                const double gamma = sir_to_gamma(sir);
                CHECK(q_window(p, sir) == test::brute_q_window(p, gamma));
                CHECK(q_tap(p, sir) == test::brute_q_tap(p, gamma));
            }
        }
    }
    SECTION("ordering and monotonicity")
    {
        std::mt19937_64 rng(13);
        std::exponential_distribution<double> e(1.0);
        for (int t = 0; t < 300; ++t)
        {
            std::vector<double> p(40);
            for (std::size_t b = 0; b < p.size(); ++b)
                p[b] = e(rng) * std::exp(-static_cast<double>(b) / 6.0);
            std::size_t prev_w = 0, prev_t = 0;
            for (double sir = -5.0; sir <= 30.0; sir += 2.5)
            {
                const auto w = q_window(p, sir);
                const auto k = q_tap(p, sir);
                CHECK(k <= w);
                CHECK(k >= 1);
                CHECK(w >= prev_w);
                CHECK(k >= prev_t);
                prev_w = w;
                prev_t = k;
            }
        }
    }
    SECTION("oversampled bins collapse to resolvable bins")
    {
        std::vector<double> power(40, 0.0);
        power[3] = 1.0;
        power[7] = 1.0;
        power[25] = 2.0;
        const auto pdp = test::make_pdp(power, 0.2857e-9, 10);
        const auto res = resolvable_powers(pdp);
        REQUIRE(res.size() == 4);
        CHECK(res == std::vector<double>{2.0, 0.0, 2.0, 0.0});
        const auto q = q_parameters(pdp, 10.0);
        CHECK(q.q_win == 3);
        CHECK(q.q_tap == 2);
        CHECK(q.q_win_seconds == Approx(3.0 * 2.857e-9 * 1.2));
    }
}

TEST_CASE("delay spread distribution fits", "[stats]")
{
    std::mt19937_64 rng(99);
    SECTION("normal in dBs")
    {
        std::normal_distribution<double> n(-75.0, 4.0);
        std::vector<double> x(10000);
        for (auto &v : x)
            v = n(rng);
        const auto f = fit_ds_distribution(x);
        CHECK(f.mu == Approx(-75.0).margin(0.1));
        CHECK(f.sigma == Approx(4.0).margin(0.1));
        CHECK(f.mu_ci.lo <= f.mu);
        CHECK(f.mu <= f.mu_ci.hi);
        CHECK(f.sigma_ci.lo <= f.sigma);
        CHECK(f.sigma <= f.sigma_ci.hi);
        CHECK(f.r_squared > 0.999);

        // two well separated populations fit a single normal badly
        std::normal_distribution<double> a(-80.0, 1.0), b(-68.0, 1.0);
        std::vector<double> mix(10000);
        for (std::size_t i = 0; i < mix.size(); ++i)
            mix[i] = i % 2 ? a(rng) : b(rng);
        CHECK(fit_ds_distribution(mix).r_squared < f.r_squared - 0.05);
    }
    SECTION("normal-theory intervals")
    {
        std::normal_distribution<double> n(-70.0, 3.0);
        std::vector<double> x(40);
        for (auto &v : x)
            v = n(rng);
        const auto f = fit_ds_distribution(x, 0.95);
        double mean = 0.0, ss = 0.0;
        for (double v : x)
            mean += v;
        mean /= 40.0;
        for (double v : x)
            ss += (v - mean) * (v - mean);
        // t(39) 0.975 = 2.0227, chi2(39) 0.025/0.975 = 23.654 / 58.120
        const double half = 2.022690911734728 * std::sqrt(ss / 39.0) / std::sqrt(40.0);
        CHECK(f.mu_ci.hi - f.mu == Approx(half).epsilon(1e-6));
        CHECK(f.sigma_ci.lo == Approx(std::sqrt(ss / 58.12005973468633)).epsilon(1e-6));
        CHECK(f.sigma_ci.hi == Approx(std::sqrt(ss / 23.65432116673202)).epsilon(1e-6));
    }
    SECTION("magnitude log-normal")
    {
        std::normal_distribution<double> ln(std::log(72.0), 0.05);
        std::vector<double> x(2000);
        for (auto &v : x)
            v = -std::exp(ln(rng));
        const auto f = fit_ds_magnitude_lognormal(x);
        CHECK(f.mu == Approx(std::log(72.0)).margin(0.01));
        CHECK(f.sigma == Approx(0.05).margin(0.005));
        x[0] = 1.0;
        CHECK_THROWS(fit_ds_magnitude_lognormal(x));
    }
    SECTION("errors")
    {
        CHECK_THROWS_AS(fit_ds_distribution(std::vector<double>(50, -70.0)), FitError);
        CHECK_THROWS(fit_ds_distribution(std::vector<double>(29, -70.0)));
    }
}

TEST_CASE("delay spread versus distance", "[stats]")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d(20.0, 250.0);
    std::normal_distribution<double> noise(0.0, 0.01);
    auto build = [&](auto law) {
        std::vector<DsSample> s(2000);
        for (auto &x : s)
        {
            x.distance = d(rng);
            x.ds_dbs = law(x.distance);
        }
        return fit_ds_vs_distance(s, 5.0);
    };
    const auto flat = build([&](double) { return -75.0 + noise(rng); });
    CHECK(flat.slope == Approx(0.0).margin(0.01));
    const auto power = build([](double dist) { return 10.0 * std::log10(3e-9 * std::pow(dist, 0.1)); });
    CHECK(power.slope == Approx(0.1).epsilon(1e-9));
    CHECK(power.slope_per_decade == Approx(1.0).epsilon(1e-9));
    CHECK(power.intercept == Approx(10.0 * std::log10(3e-9)).epsilon(1e-9));
    const auto falling = build([](double dist) { return -70.0 - 0.05 * dist; });
    CHECK(falling.slope < 0.0);
    CHECK(falling.n_bins >= 40);

    const std::vector<DsSample> one_bin{{-70.0, 21.0}, {-71.0, 22.0}};
    CHECK_THROWS_AS(fit_ds_vs_distance(one_bin), FitError);
}

TEST_CASE("empirical CDF", "[stats]")
{
    const EmpiricalCdf c({3.0, 1.0, 2.0});
    CHECK(c.quantile(0.5) == 2.0);
    CHECK(c.cdf(2.0) == Approx(2.0 / 3.0));
    CHECK(c.cdf(0.5) == 0.0);
    CHECK(c.cdf(3.0) == 1.0);

    const EmpiricalCdf one({4.2});
    CHECK(one.cdf(4.2 - 1e-12) == 0.0);
    CHECK(one.cdf(4.2) == 1.0);
    CHECK(one.quantile(0.01) == 4.2);
    CHECK_THROWS(EmpiricalCdf({}));
    CHECK_THROWS(c.quantile(0.0));

    std::mt19937_64 rng(6);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> x(1000);
    for (auto &v : x)
        v = n(rng);
    const EmpiricalCdf big(x);
    for (double p = 0.001; p <= 1.0; p += 0.037)
    {
        CHECK(big.cdf(big.quantile(p)) >= p - 1e-12);
        CHECK(big.cdf(big.quantile(p)) < p + 1.0 / 1000.0 + 1e-12);
    }
}

TEST_CASE("drift decorrelation distance distribution", "[stats][slow]")
{
    // per-link decorrelation distances drawn log-normal: median 7.66 m,
    // sigma_ln 0.731 (mean 10 m, 10th percentile 3 m)
    std::mt19937_64 rng(2024);
    std::lognormal_distribution<double> dcorr(std::log(7.66), 0.731);
    const double spacing = 0.25;
    std::vector<double> measured;
    for (int link = 0; link < 1000; ++link)
    {
        const double d = dcorr(rng);
        const auto n = static_cast<std::size_t>(std::max(2000.0, 200.0 * d / spacing));
        std::vector<double> coord(n);
        for (std::size_t i = 0; i < n; ++i)
            coord[i] = spacing * static_cast<double>(i);
        const auto series = gauss_markov_field(coord, d, rng);
        const double est = decorrelation_distance(series, spacing);
        REQUIRE(std::isfinite(est));
        measured.push_back(est);
    }
    const EmpiricalCdf cdf(measured);
    const double mean = std::accumulate(measured.begin(), measured.end(), 0.0) / static_cast<double>(measured.size());
    CHECK(mean == Approx(10.0).epsilon(0.15));
    CHECK(cdf.quantile(0.1) == Approx(3.0).epsilon(0.2));

    CHECK(std::isnan(decorrelation_distance(std::vector<double>(10, 1.0), 1.0)));
}
