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

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <random>

namespace chansound
{

namespace
{

constexpr double inv_sqrt_2pi = 0.39894228040143267794;

// log Phi(u) and the inverse Mills ratio phi(u) / Phi(u), stable for u << 0.
void log_cdf_and_mills(double u, double &log_cdf, double &mills)
{
    if (u > -30.0)
    {
        const double cdf = 0.5 * std::erfc(-u / std::sqrt(2.0));
        const double pdf = inv_sqrt_2pi * std::exp(-0.5 * u * u);
        log_cdf = std::log(cdf);
        mills = pdf / cdf;
        return;
    }
    // asymptotic series of the Mills ratio
    const double u2 = u * u;
    const double series = 1.0 - 1.0 / u2 + 3.0 / (u2 * u2) - 15.0 / (u2 * u2 * u2);
    log_cdf = -0.5 * u2 - std::log(-u) - 0.5 * std::log(2.0 * pi) + std::log(series);
    mills = -u / series;
}

struct Olsen
{
    // d0 = beta / sigma, d1 = alpha / sigma, h = 1 / sigma
    std::array<double, 3> p{};
};

double log_likelihood(std::span<const CensoredObservation> obs, const Olsen &th)
{
    const double d0 = th.p[0], d1 = th.p[1], h = th.p[2];
    if (!(h > 0.0))
        return -INFINITY;
    double ll = 0.0;
    for (const auto &o : obs)
    {
        const double mu = d0 + d1 * o.x;
        if (o.censored)
        {
            double lc, mills;
            log_cdf_and_mills(mu - h * o.y, lc, mills);
            ll += o.weight * lc;
        }
        else
        {
            const double e = h * o.y - mu;
            ll += o.weight * (std::log(h) - 0.5 * e * e);
        }
    }
    return ll;
}

void gradient_hessian(std::span<const CensoredObservation> obs, const Olsen &th, std::array<double, 3> &g,
                      std::array<std::array<double, 3>, 3> &H)
{
    g = {0.0, 0.0, 0.0};
    H = {};
    const double d0 = th.p[0], d1 = th.p[1], h = th.p[2];
    for (const auto &o : obs)
    {
        const std::array<double, 2> z{1.0, o.x};
        const double w = o.weight;
        const double mu = d0 + d1 * o.x;
        if (o.censored)
        {
            const double u = mu - h * o.y;
            double lc, lam;
            log_cdf_and_mills(u, lc, lam);
            const double dlam = -lam * (u + lam); // second derivative of log Phi
            const std::array<double, 3> du{z[0], z[1], -o.y};
            for (int a = 0; a < 3; ++a)
            {
                g[a] += w * lam * du[a];
                for (int b = 0; b < 3; ++b)
                    H[a][b] += w * dlam * du[a] * du[b];
            }
        }
        else
        {
            const double e = h * o.y - mu;
            g[0] += w * e * z[0];
            g[1] += w * e * z[1];
            g[2] += w * (1.0 / h - e * o.y);
            for (int a = 0; a < 2; ++a)
            {
                for (int b = 0; b < 2; ++b)
                    H[a][b] -= w * z[a] * z[b];
                H[a][2] += w * z[a] * o.y;
                H[2][a] += w * z[a] * o.y;
            }
            H[2][2] -= w * (1.0 / (h * h) + o.y * o.y);
        }
    }
}

bool solve3(std::array<std::array<double, 3>, 3> A, std::array<double, 3> b, std::array<double, 3> &x)
{
    for (int c = 0; c < 3; ++c)
    {
        int piv = c;
        for (int r = c + 1; r < 3; ++r)
            if (std::abs(A[r][c]) > std::abs(A[piv][c]))
                piv = r;
        if (std::abs(A[piv][c]) < 1e-300)
            return false;
        std::swap(A[c], A[piv]);
        std::swap(b[c], b[piv]);
        for (int r = c + 1; r < 3; ++r)
        {
            const double f = A[r][c] / A[c][c];
            for (int k = c; k < 3; ++k)
                A[r][k] -= f * A[c][k];
            b[r] -= f * b[c];
        }
    }
    for (int c = 2; c >= 0; --c)
    {
        double s = b[c];
        for (int k = c + 1; k < 3; ++k)
            s -= A[c][k] * x[k];
        x[c] = s / A[c][c];
    }
    return true;
}

// Weighted least squares on all rows (censored rows at their bound).
bool weighted_ols(std::span<const CensoredObservation> obs, double &alpha, double &beta, double &sigma)
{
    double sw = 0.0, sx = 0.0, sy = 0.0;
    for (const auto &o : obs)
    {
        sw += o.weight;
        sx += o.weight * o.x;
        sy += o.weight * o.y;
    }
    if (!(sw > 0.0))
        return false;
    const double mx = sx / sw, my = sy / sw;
    double sxx = 0.0, sxy = 0.0;
    for (const auto &o : obs)
    {
        sxx += o.weight * (o.x - mx) * (o.x - mx);
        sxy += o.weight * (o.x - mx) * (o.y - my);
    }
    if (!(sxx > 0.0))
        return false;
    alpha = sxy / sxx;
    beta = my - alpha * mx;
    double ss = 0.0;
    for (const auto &o : obs)
    {
        const double r = o.y - alpha * o.x - beta;
        ss += o.weight * r * r;
    }
    sigma = std::sqrt(ss / sw);
    return true;
}

} // namespace

TobitResult tobit_fit(std::span<const CensoredObservation> obs)
{
    std::size_t n_unc = 0;
    for (const auto &o : obs)
        n_unc += o.censored ? 0 : 1;
    if (n_unc == 0)
        throw FitError("all samples censored: no fit");

    double a0, b0, s0;
    if (!weighted_ols(obs, a0, b0, s0))
        throw FitError("degenerate regression");

    TobitResult res;
    if (n_unc == obs.size() && s0 <= 1e-12 * (1.0 + std::abs(b0)))
    {
        // exact line: the likelihood has no finite maximum in sigma
        res.alpha = a0;
        res.beta = b0;
        res.sigma = 0.0;
        res.log_likelihood = INFINITY;
        res.converged = true;
        return res;
    }
    s0 = std::max(s0, 1e-3);

    Olsen th;
    th.p = {b0 / s0, a0 / s0, 1.0 / s0};
    double ll = log_likelihood(obs, th);

    for (int it = 0; it < 200; ++it)
    {
        res.iterations = it + 1;
        std::array<double, 3> g;
        std::array<std::array<double, 3>, 3> H;
        gradient_hessian(obs, th, g, H);

        // Newton direction: H step = -g
        std::array<double, 3> step{};
        std::array<double, 3> rhs{-g[0], -g[1], -g[2]};
        if (!solve3(H, rhs, step))
            break;

        double t = 1.0;
        Olsen next;
        double ll_next = -INFINITY;
        for (int k = 0; k < 60; ++k)
        {
            for (int a = 0; a < 3; ++a)
                next.p[a] = th.p[a] + t * step[a];
            ll_next = log_likelihood(obs, next);
            if (ll_next >= ll - 1e-12 * std::abs(ll))
                break;
            t *= 0.5;
        }
        if (!(ll_next >= ll - 1e-12 * std::abs(ll)))
            break;

        double max_rel = 0.0;
        for (int a = 0; a < 3; ++a)
            max_rel = std::max(max_rel, std::abs(next.p[a] - th.p[a]) / std::max(1.0, std::abs(th.p[a])));
        th = next;
        ll = ll_next;
        if (max_rel < 1e-13)
        {
            res.converged = true;
            break;
        }
    }
    if (!res.converged)
    {
        // accept if the gradient vanished even when the step test did not fire
        std::array<double, 3> g;
        std::array<std::array<double, 3>, 3> H;
        gradient_hessian(obs, th, g, H);
        double sw = 0.0;
        for (const auto &o : obs)
            sw += o.weight;
        res.converged = std::abs(g[0]) + std::abs(g[1]) + std::abs(g[2]) < 1e-8 * std::max(1.0, sw);
    }

    res.sigma = 1.0 / th.p[2];
    res.beta = th.p[0] * res.sigma;
    res.alpha = th.p[1] * res.sigma;
    res.log_likelihood = ll;
    return res;
}

std::vector<CensoredObservation> bin_pathloss_observations(std::span<const PathGainSample> samples, double bin_width,
                                                           bool ignore_censored, std::size_t *n_bins)
{
    if (!(bin_width > 0.0))
        throw std::invalid_argument("bin width must be positive");
    std::map<long, std::vector<std::size_t>> bins;
    for (std::size_t i = 0; i < samples.size(); ++i)
    {
        const auto &s = samples[i];
        if (ignore_censored && s.censored)
            continue;
        if (!(s.distance > 0.0))
            throw std::invalid_argument("distance must be positive");
        if (s.censored ? !(s.ceiling > 0.0) : !(s.path_gain > 0.0))
            throw std::invalid_argument("path gain sample without a positive value or ceiling");
        bins[static_cast<long>(std::floor(s.distance / bin_width))].push_back(i);
    }
    if (n_bins)
        *n_bins = bins.size();

    std::vector<CensoredObservation> obs;
    for (const auto &[b, idx] : bins)
    {
        double x = 0.0;
        for (std::size_t i : idx)
            x += 10.0 * std::log10(samples[i].distance);
        x /= static_cast<double>(idx.size());
        const double w = 1.0 / static_cast<double>(idx.size());
        for (std::size_t i : idx)
        {
            const auto &s = samples[i];
            // pathloss = -PG in dB; a censored PG below the ceiling means PL above -ceiling
            const double y = s.censored ? -to_db(s.ceiling) : -to_db(s.path_gain);
            obs.push_back({x, y, s.censored, w});
        }
    }
    return obs;
}

namespace
{

struct PointFit
{
    TobitResult tobit;
    std::size_t n_bins = 0;
};

PointFit fit_once(std::span<const PathGainSample> samples, const PathlossFitOptions &opt)
{
    PointFit pf;
    const auto obs = bin_pathloss_observations(samples, opt.bin_width, opt.ignore_censored, &pf.n_bins);
    if (pf.n_bins < 2)
        throw FitError("degenerate regression: fewer than two occupied distance bins");
    pf.tobit = tobit_fit(obs);
    return pf;
}

} // namespace

PathlossFit fit_pathloss(std::span<const PathGainSample> samples, LosState state, const PathlossFitOptions &opt)
{
    std::vector<PathGainSample> used;
    for (const auto &s : samples)
    {
        if (s.los != state)
            continue;
        if (opt.min_distance && s.distance < *opt.min_distance)
            continue;
        if (opt.max_distance && s.distance > *opt.max_distance)
            continue;
        if (opt.ignore_censored && s.censored)
            continue;
        used.push_back(s);
    }
    if (used.empty())
        throw FitError(std::string("no ") + to_string(state) + " samples to fit");

    PathlossFit fit;
    fit.state = state;
    fit.bin_width = opt.bin_width;
    fit.n_samples = used.size();
    fit.validity_min = INFINITY;
    fit.validity_max = -INFINITY;
    for (const auto &s : used)
    {
        fit.n_censored += s.censored ? 1 : 0;
        fit.validity_min = std::min(fit.validity_min, s.distance);
        fit.validity_max = std::max(fit.validity_max, s.distance);
    }

    const auto point = fit_once(used, opt);
    fit.alpha = point.tobit.alpha;
    fit.beta = point.tobit.beta;
    fit.sigma_s = point.tobit.sigma;
    fit.n_bins = point.n_bins;
    fit.converged = point.tobit.converged;

    fit.alpha_ci = {fit.alpha, fit.alpha};
    fit.beta_ci = {fit.beta, fit.beta};
    fit.sigma_ci = {fit.sigma_s, fit.sigma_s};
    if (opt.bootstrap < 2)
        return fit;

    std::mt19937_64 rng(opt.seed);
    std::uniform_int_distribution<std::size_t> pick(0, used.size() - 1);
    std::vector<PathGainSample> resample(used.size());
    double sa = 0.0, sb = 0.0, ss = 0.0, saa = 0.0, sbb = 0.0, sss = 0.0;
    std::size_t ok = 0;
    for (std::size_t r = 0; r < opt.bootstrap; ++r)
    {
        for (auto &s : resample)
            s = used[pick(rng)];
        try
        {
            const auto bf = fit_once(resample, opt);
            sa += bf.tobit.alpha;
            saa += bf.tobit.alpha * bf.tobit.alpha;
            sb += bf.tobit.beta;
            sbb += bf.tobit.beta * bf.tobit.beta;
            ss += bf.tobit.sigma;
            sss += bf.tobit.sigma * bf.tobit.sigma;
            ++ok;
        }
        catch (const FitError &)
        {
            // degenerate resample (one bin or all censored); skip it
        }
    }
    if (ok < 2)
        return fit;

    const double n = static_cast<double>(ok);
    auto se = [n](double s, double s2) { return std::sqrt(std::max(0.0, (s2 - s * s / n) / (n - 1.0))); };
    const double z = boost::math::quantile(boost::math::normal(), 0.5 + 0.5 * opt.confidence);
    const double se_a = se(sa, saa), se_b = se(sb, sbb), se_s = se(ss, sss);
    fit.alpha_ci = {fit.alpha - z * se_a, fit.alpha + z * se_a};
    fit.beta_ci = {fit.beta - z * se_b, fit.beta + z * se_b};
    fit.sigma_ci = {std::max(0.0, fit.sigma_s - z * se_s), fit.sigma_s + z * se_s};
    return fit;
}

} // namespace chansound
