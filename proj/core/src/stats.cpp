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

#include "chansound/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>

namespace chansound
{

PathGainSample path_gain(const PowerDelayProfile &pdp, double distance, LosState los)
{
    PathGainSample s;
    s.distance = distance;
    s.los = los;
    s.window = pdp.window;
    s.receiver = pdp.receiver;
    s.path_gain = pdp.total_power();
    if (!(s.path_gain > 0.0))
    {
        s.path_gain = 0.0;
        s.censored = true;
        s.ceiling = pdp.threshold * pdp.energy_per_peak;
    }
    return s;
}

std::vector<PathGainSample> average_path_gain(std::span<const PathGainSample> samples, double window)
{
    if (!(window > 0.0))
        throw std::invalid_argument("PG window must be positive");

    // (receiver, state) -> member indices
    std::map<std::pair<std::size_t, int>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < samples.size(); ++i)
        groups[{samples[i].receiver, static_cast<int>(samples[i].los)}].push_back(i);

    std::vector<PathGainSample> out;
    for (const auto &[key, members] : groups)
    {
        // bucket by window index along the track
        double s0 = INFINITY;
        for (std::size_t i : members)
            s0 = std::min(s0, samples[i].track_position);
        std::map<long, std::vector<std::size_t>> buckets;
        for (std::size_t i : members)
            buckets[static_cast<long>(std::floor((samples[i].track_position - s0) / window))].push_back(i);

        for (const auto &[w, idx] : buckets)
        {
            PathGainSample avg = samples[idx.front()];
            std::size_t n_ok = 0;
            double pg = 0.0;
            double dist_ok = 0.0;
            double dist_all = 0.0;
            double ceiling = 0.0;
            double pos = 0.0;
            bool olos = false;
            for (std::size_t i : idx)
            {
                const auto &s = samples[i];
                dist_all += s.distance;
                pos += s.track_position;
                olos = olos || s.olos;
                if (s.censored)
                {
                    ceiling += s.ceiling;
                    continue;
                }
                ++n_ok;
                pg += s.path_gain;
                dist_ok += s.distance;
            }
            const double n = static_cast<double>(idx.size());
            avg.olos = olos;
            avg.track_position = pos / n;
            if (n_ok == 0)
            {
                avg.censored = true;
                avg.path_gain = 0.0;
                avg.ceiling = ceiling / n;
                avg.distance = dist_all / n;
            }
            else
            {
                avg.censored = false;
                avg.ceiling = 0.0;
                avg.path_gain = pg / static_cast<double>(n_ok);
                avg.distance = dist_ok / static_cast<double>(n_ok);
            }
            out.push_back(avg);
        }
    }
    return out;
}

double rms_delay_spread(std::span<const double> power, double delay_bin)
{
    double total = 0.0;
    double first = 0.0;
    for (std::size_t b = 0; b < power.size(); ++b)
    {
        total += power[b];
        first += power[b] * static_cast<double>(b);
    }
    if (!(total > 0.0))
        return 0.0;
    const double mean_bin = first / total;
    double second = 0.0;
    for (std::size_t b = 0; b < power.size(); ++b)
    {
        if (power[b] == 0.0)
            continue;
        const double d = static_cast<double>(b) - mean_bin;
        second += power[b] * d * d;
    }
    return std::sqrt(std::max(0.0, second / total)) * delay_bin;
}

DelaySpreadResult rms_delay_spread(const PowerDelayProfile &pdp, double min_dynamic_range_db)
{
    DelaySpreadResult r;
    r.dynamic_range_db = std::isnan(pdp.dynamic_range_db) ? dynamic_range_db(pdp) : pdp.dynamic_range_db;
    if (!(pdp.total_power() > 0.0))
    {
        r.excluded = true;
        r.reason = "empty_pdp";
        return r;
    }
    if (r.dynamic_range_db < min_dynamic_range_db)
    {
        r.excluded = true;
        r.reason = "low_dynamic_range";
        return r;
    }
    r.value = rms_delay_spread(pdp.power, pdp.delay_bin);
    return r;
}

double sir_to_gamma(double sir_db)
{
    const double sir = from_db(sir_db);
    const double gamma = sir / (sir + 1.0);
    if (!std::isfinite(sir) || !(gamma < 1.0) || !(gamma > 0.0))
        throw std::invalid_argument("SIR of " + std::to_string(sir_db) + " dB gives unreachable gamma");
    return gamma;
}

std::vector<double> resolvable_powers(const PowerDelayProfile &pdp)
{
    const std::size_t os = std::max<std::size_t>(pdp.oversample, 1);
    std::vector<double> out((pdp.power.size() + os - 1) / os, 0.0);
    for (std::size_t b = 0; b < pdp.power.size(); ++b)
        out[b / os] += pdp.power[b];
    return out;
}

namespace
{

bool reaches(long double sum, double target)
{
    return sum >= static_cast<long double>(target) * (1.0L - static_cast<long double>(q_relative_tolerance));
}

} // namespace

std::size_t q_window(std::span<const double> p, double sir_db)
{
    const double gamma = sir_to_gamma(sir_db);
    long double pg = 0.0L;
    for (double v : p)
        pg += v;
    if (!(pg > 0.0L))
        return 0;
    const double target = gamma * static_cast<double>(pg);

    std::size_t best = p.size();
    long double sum = 0.0L;
    std::size_t left = 0;
    for (std::size_t right = 0; right < p.size(); ++right)
    {
        sum += p[right];
        while (left <= right && reaches(sum, target))
        {
            best = std::min(best, right - left + 1);
            sum -= p[left];
            ++left;
        }
    }
    return best;
}

std::size_t q_tap(std::span<const double> p, double sir_db)
{
    const double gamma = sir_to_gamma(sir_db);
    std::vector<double> sorted(p.begin(), p.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    long double pg = 0.0L;
    for (double v : p)
        pg += v;
    if (!(pg > 0.0L))
        return 0;
    const double target = gamma * static_cast<double>(pg);
    long double sum = 0.0L;
    for (std::size_t x = 0; x < sorted.size(); ++x)
    {
        sum += sorted[x];
        if (reaches(sum, target))
            return x + 1;
    }
    return sorted.size();
}

QParameters q_parameters(const PowerDelayProfile &pdp, double sir_db)
{
    const auto res = resolvable_powers(pdp);
    QParameters q;
    q.sir_db = sir_db;
    q.q_win = q_window(res, sir_db);
    q.q_tap = q_tap(res, sir_db);
    q.q_win_seconds = static_cast<double>(q.q_win) * pdp.resolvable_bin * kaiser_broadening;
    return q;
}

namespace
{

NormalFit fit_normal(std::vector<double> x, double confidence)
{
    const std::size_t n = x.size();
    if (n < 30)
        throw std::invalid_argument("at least 30 samples are required, got " + std::to_string(n));
    const double dn = static_cast<double>(n);
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / dn;
    double ss = 0.0;
    for (double v : x)
        ss += (v - mean) * (v - mean);
    if (!(ss > 0.0))
        throw FitError("degenerate sample: zero variance");

    NormalFit f;
    f.n = n;
    f.mu = mean;
    f.sigma = std::sqrt(ss / dn);
    const double s = std::sqrt(ss / (dn - 1.0));
    const double a = 1.0 - confidence;

    boost::math::students_t t(dn - 1.0);
    const double tq = boost::math::quantile(t, 1.0 - a / 2.0);
    f.mu_ci = {mean - tq * s / std::sqrt(dn), mean + tq * s / std::sqrt(dn)};

    boost::math::chi_squared chi(dn - 1.0);
    const double chi_hi = boost::math::quantile(chi, 1.0 - a / 2.0);
    const double chi_lo = boost::math::quantile(chi, a / 2.0);
    f.sigma_ci = {std::sqrt(ss / chi_hi), std::sqrt(ss / chi_lo)};

    std::sort(x.begin(), x.end());
    boost::math::normal unit;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        const double q = f.mu + f.sigma * boost::math::quantile(unit, (static_cast<double>(i) + 0.5) / dn);
        ss_res += (x[i] - q) * (x[i] - q);
    }
    f.r_squared = 1.0 - ss_res / ss;
    return f;
}

} // namespace

NormalFit fit_ds_distribution(std::span<const double> ds_dbs, double confidence)
{
    return fit_normal(std::vector<double>(ds_dbs.begin(), ds_dbs.end()), confidence);
}

NormalFit fit_ds_magnitude_lognormal(std::span<const double> ds_dbs, double confidence)
{
    std::vector<double> y;
    y.reserve(ds_dbs.size());
    for (double v : ds_dbs)
    {
        if (!(v < 0.0))
            throw std::invalid_argument("magnitude fit needs delay spreads below 1 s (negative dBs)");
        y.push_back(std::log(-v));
    }
    return fit_normal(std::move(y), confidence);
}

DsDistanceFit fit_ds_vs_distance(std::span<const DsSample> samples, double bin_width)
{
    if (!(bin_width > 0.0))
        throw std::invalid_argument("bin width must be positive");
    std::map<long, std::tuple<double, double, std::size_t>> bins;
    for (const auto &s : samples)
    {
        if (!(s.distance > 0.0))
            throw std::invalid_argument("distance must be positive");
        auto &[sx, sy, n] = bins[static_cast<long>(std::floor(s.distance / bin_width))];
        sx += 10.0 * std::log10(s.distance);
        sy += s.ds_dbs;
        ++n;
    }
    if (bins.size() < 2)
        throw FitError("degenerate regression: fewer than two distance bins");

    std::vector<double> xs, ys;
    for (const auto &[b, v] : bins)
    {
        const auto &[sx, sy, n] = v;
        xs.push_back(sx / static_cast<double>(n));
        ys.push_back(sy / static_cast<double>(n));
    }
    const double nb = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / nb;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / nb;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
    {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (!(sxx > 0.0))
        throw FitError("degenerate regression: no distance spread");
    DsDistanceFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.slope_per_decade = 10.0 * f.slope;
    f.n_bins = xs.size();
    return f;
}

EmpiricalCdf::EmpiricalCdf(std::vector<double> samples) : sorted_(std::move(samples))
{
    if (sorted_.empty())
        throw std::invalid_argument("empirical CDF needs at least one sample");
    std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCdf::cdf(double x) const
{
    const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
    return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

double EmpiricalCdf::quantile(double p) const
{
    if (!(p > 0.0) || p > 1.0)
        throw std::invalid_argument("quantile probability must be in (0, 1]");
    const double n = static_cast<double>(sorted_.size());
    auto rank = static_cast<std::size_t>(std::ceil(p * n - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, sorted_.size());
    return sorted_[rank - 1];
}

double decorrelation_distance(std::span<const double> series, double spacing)
{
    const std::size_t n = series.size();
    if (n < 3)
        return std::nan("");
    const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
    double c0 = 0.0;
    for (double v : series)
        c0 += (v - mean) * (v - mean);
    if (!(c0 > 0.0))
        return std::nan("");
    const double target = std::exp(-1.0);
    double prev = 1.0;
    for (std::size_t k = 1; k < n / 2; ++k)
    {
        double ck = 0.0;
        for (std::size_t i = 0; i + k < n; ++i)
            ck += (series[i] - mean) * (series[i + k] - mean);
        const double r = ck / c0;
        if (r <= target)
        {
            const double frac = (prev - target) / (prev - r);
            return (static_cast<double>(k - 1) + frac) * spacing;
        }
        prev = r;
    }
    return std::nan("");
}

} // namespace chansound
