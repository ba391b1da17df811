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

#pragma once

#include "chansound/stats.hpp"

#include <cstdint>
#include <optional>
#include <span>

namespace chansound
{

// One pathloss observation for the regression PL = alpha * x + beta + S,
// x = 10 log10(d). Censored rows only bound PL from below: PL > y.
struct CensoredObservation
{
    double x = 0.0;
    double y = 0.0;
    bool censored = false;
    double weight = 1.0;
};

struct TobitResult
{
    double alpha = 0.0;
    double beta = 0.0;
    double sigma = 0.0;
    double log_likelihood = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Weighted maximum-likelihood fit with right-censored pathloss (left-censored
// path gain). Newton iterations in the (beta/sigma, alpha/sigma, 1/sigma)
// parametrization, where the log-likelihood is concave.
TobitResult tobit_fit(std::span<const CensoredObservation> obs);

struct PathlossFitOptions
{
    double bin_width = 2.0; // m
    std::size_t bootstrap = 1000;
    std::uint64_t seed = 1;
    double confidence = 0.95;
    std::optional<double> min_distance;
    std::optional<double> max_distance;
    bool ignore_censored = false; // naive reference fit: drop censored samples
};

struct PathlossFit
{
    LosState state = LosState::los;
    double alpha = 0.0;
    double beta = 0.0;    // dB
    double sigma_s = 0.0; // dB
    Interval alpha_ci;
    Interval beta_ci;
    Interval sigma_ci;
    double bin_width = 0.0;
    double validity_min = 0.0; // measured distance support, m
    double validity_max = 0.0;
    std::size_t n_samples = 0;
    std::size_t n_censored = 0;
    std::size_t n_bins = 0;
    bool converged = false;
};

// Samples are binned by distance; every sample takes its bin's mean
// log-distance as regressor and weight 1 / (bin count), so bins count equally
// and without censoring the result is ordinary least squares on bin means.
// sigma_s is the per-sample ML residual std. CIs: bootstrap standard error
// around the point estimate (normal interval).
PathlossFit fit_pathloss(std::span<const PathGainSample> samples, LosState state,
                         const PathlossFitOptions &options = {});

// Binned observations for `samples` (all states accepted).
std::vector<CensoredObservation> bin_pathloss_observations(std::span<const PathGainSample> samples,
                                                           double bin_width, bool ignore_censored,
                                                           std::size_t *n_bins = nullptr);

} // namespace chansound
