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

#include "chansound/pathloss_fit.hpp"

#include "test_support.hpp"

#include <catch_amalgamated.hpp>

#include <boost/math/distributions/normal.hpp>

#include <map>
#include <numeric>

using namespace chansound;
using Catch::Approx;
using test::pg_sample;
using test::synthetic_campaign;

namespace
{

// Independent Tobit log-likelihood in (alpha, beta, sigma).
double oracle_loglik(const std::vector<CensoredObservation> &obs, double a, double b, double s)
{
    const boost::math::normal unit;
    double ll = 0.0;
    for (const auto &o : obs)
    {
        const double z = (o.y - (a * o.x + b)) / s;
        if (o.censored)
            ll += o.weight * std::log(boost::math::cdf(boost::math::complement(unit, z)));
        else
            ll += o.weight * (std::log(boost::math::pdf(unit, z)) - std::log(s));
    }
    return ll;
}

} // namespace

TEST_CASE("exact line is recovered", "[fit]")
{
    std::vector<PathGainSample> s;
    for (double d = 12.0; d <= 178.0; d += 0.37)
        s.push_back(pg_sample(d, 2.0 * 10.0 * std::log10(d) + 40.0));
    PathlossFitOptions opt;
    opt.bootstrap = 0;
    const auto f = fit_pathloss(s, LosState::los, opt);
    CHECK(f.alpha == Approx(2.0).margin(1e-6));
    CHECK(f.beta == Approx(40.0).margin(1e-6));
    // samples share their bin's mean log-distance, so the spread of log d
    // within a 2 m bin shows up as a small residual
    CHECK(f.sigma_s < 0.2);
    CHECK(f.converged);
}

TEST_CASE("without censoring the fit is OLS on bin means", "[fit]")
{
    const auto syn = synthetic_campaign(3.0, 35.0, 6.0, 0.0, 1500, 8);
    PathlossFitOptions opt;
    opt.bootstrap = 0;
    opt.bin_width = 2.0;
    const auto f = fit_pathloss(syn.samples, LosState::los, opt);

    std::map<long, std::pair<std::vector<double>, std::vector<double>>> bins;
    for (const auto &s : syn.samples)
    {
        auto &[xs, ys] = bins[static_cast<long>(std::floor(s.distance / 2.0))];
        xs.push_back(10.0 * std::log10(s.distance));
        ys.push_back(-10.0 * std::log10(s.path_gain));
    }
    std::vector<double> mx, my;
    for (const auto &[k, v] : bins)
    {
        mx.push_back(std::accumulate(v.first.begin(), v.first.end(), 0.0) / static_cast<double>(v.first.size()));
        my.push_back(std::accumulate(v.second.begin(), v.second.end(), 0.0) / static_cast<double>(v.second.size()));
    }
    const double n = static_cast<double>(mx.size());
    const double ax = std::accumulate(mx.begin(), mx.end(), 0.0) / n;
    const double ay = std::accumulate(my.begin(), my.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < mx.size(); ++i)
    {
        sxx += (mx[i] - ax) * (mx[i] - ax);
        sxy += (mx[i] - ax) * (my[i] - ay);
    }
    const double slope = sxy / sxx;
    CHECK(f.alpha == Approx(slope).margin(1e-6));
    CHECK(f.beta == Approx(ay - slope * ax).margin(1e-6));
    CHECK(f.n_bins == bins.size());
    CHECK(f.n_censored == 0);
}

TEST_CASE("Tobit maximum matches an independent likelihood", "[fit]")
{
    const auto syn = synthetic_campaign(3.5, 30.0, 8.0, 0.3, 800, 21);
    const auto obs = bin_pathloss_observations(syn.samples, 2.0, false);
    const auto r = tobit_fit(obs);
    REQUIRE(r.converged);
    const double ll = oracle_loglik(obs, r.alpha, r.beta, r.sigma);
    const double h = 1e-4;
    const double ga = (oracle_loglik(obs, r.alpha + h, r.beta, r.sigma) - oracle_loglik(obs, r.alpha - h, r.beta, r.sigma)) / (2 * h);
    const double gb = (oracle_loglik(obs, r.alpha, r.beta + h, r.sigma) - oracle_loglik(obs, r.alpha, r.beta - h, r.sigma)) / (2 * h);
    const double gs = (oracle_loglik(obs, r.alpha, r.beta, r.sigma + h) - oracle_loglik(obs, r.alpha, r.beta, r.sigma - h)) / (2 * h);
    CHECK(std::abs(ga) < 1e-3);
    CHECK(std::abs(gb) < 1e-3);
    CHECK(std::abs(gs) < 1e-3);
    for (double da : {-0.05, 0.05})
        for (double ds : {-0.2, 0.2})
            CHECK(oracle_loglik(obs, r.alpha + da, r.beta, r.sigma + ds) < ll);
}

TEST_CASE("censored regression recovers the model", "[fit][slow]")
{
    double sum_alpha = 0.0, sum_sigma = 0.0, sum_naive = 0.0;
    const int trials = 20;
    PathlossFitOptions opt;
    opt.bootstrap = 0;
    PathlossFitOptions naive = opt;
    naive.ignore_censored = true;
    for (int t = 0; t < trials; ++t)
    {
        const auto syn = synthetic_campaign(3.5, 30.0, 8.0, 0.3, 3000, 1000 + static_cast<std::uint64_t>(t));
        CHECK(syn.censored_fraction == Approx(0.3).margin(0.01));
        const auto f = fit_pathloss(syn.samples, LosState::los, opt);
        CHECK(f.converged);
        sum_alpha += f.alpha;
        sum_sigma += f.sigma_s;
        sum_naive += fit_pathloss(syn.samples, LosState::los, naive).alpha;
    }
    CHECK(std::abs(sum_alpha / trials - 3.5) <= 0.2);
    CHECK(std::abs(sum_sigma / trials - 8.0) <= 1.0);
    CHECK(std::abs(sum_naive / trials - 3.5) > 0.2);
}

TEST_CASE("fit bookkeeping", "[fit]")
{
    const auto syn = synthetic_campaign(2.2, 38.0, 4.0, 0.1, 600, 3);
    auto samples = syn.samples;
    for (std::size_t i = 0; i < 100; ++i)
        samples.push_back(pg_sample(30.0 + i, 3.5 * 10.0 * std::log10(30.0 + i) + 30.0, LosState::nlos));

    SECTION("confidence intervals bracket the point estimate")
    {
        PathlossFitOptions opt;
        opt.bootstrap = 200;
        const auto f = fit_pathloss(samples, LosState::los, opt);
        CHECK(f.alpha_ci.lo <= f.alpha);
        CHECK(f.alpha <= f.alpha_ci.hi);
        CHECK(f.beta_ci.lo <= f.beta);
        CHECK(f.beta <= f.beta_ci.hi);
        CHECK(f.sigma_ci.lo <= f.sigma_s);
        CHECK(f.sigma_s <= f.sigma_ci.hi);
        CHECK(f.alpha_ci.hi - f.alpha_ci.lo > 0.0);
        CHECK(f.n_samples == 600);
        CHECK(f.n_censored == 60);
        const auto again = fit_pathloss(samples, LosState::los, opt);
        CHECK(again.alpha_ci.lo == f.alpha_ci.lo);
    }
    SECTION("distance restriction and validity range")
    {
        PathlossFitOptions opt;
        opt.bootstrap = 0;
        opt.min_distance = 12.0;
        opt.max_distance = 178.0;
        const auto f = fit_pathloss(samples, LosState::los, opt);
        CHECK(f.validity_min >= 20.0);
        CHECK(f.validity_max <= 178.0);
        for (const auto &s : samples)
            if (s.los == LosState::los && s.distance <= 178.0)
                CHECK(s.distance >= f.validity_min);
    }
    SECTION("states are fitted separately")
    {
        PathlossFitOptions opt;
        opt.bootstrap = 0;
        const auto f = fit_pathloss(samples, LosState::nlos, opt);
        CHECK(f.alpha == Approx(3.5).margin(1e-4));
        CHECK(f.n_samples == 100);
    }
    SECTION("errors")
    {
        PathlossFitOptions opt;
        opt.bootstrap = 0;
        std::vector<PathGainSample> censored = syn.samples;
        for (auto &s : censored)
        {
            s.censored = true;
            s.ceiling = 1e-12;
        }
        CHECK_THROWS_AS(fit_pathloss(censored, LosState::los, opt), FitError);
        const std::vector<PathGainSample> one_bin{pg_sample(50.1, 80.0), pg_sample(50.5, 82.0)};
        CHECK_THROWS_WITH(fit_pathloss(one_bin, LosState::los, opt), Catch::Matchers::ContainsSubstring("degenerate regression"));
        CHECK_THROWS_AS(fit_pathloss(one_bin, LosState::nlos, opt), FitError);
    }
}
