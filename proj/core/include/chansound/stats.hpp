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

#include "chansound/geometry.hpp"
#include "chansound/pipeline.hpp"

#include <span>
#include <string>
#include <vector>

namespace chansound
{

// ---------- Path gain ----------

struct PathGainSample
{
    double path_gain = 0.0; // linear, 0 when censored
    double ceiling = 0.0;   // sensitivity ceiling (linear PG) for censored samples
    double distance = 0.0;  // m
    LosState los = LosState::los;
    bool olos = false;
    bool censored = false;
    std::size_t window = 0;
    std::size_t receiver = 0;
    double track_position = 0.0; // m, used for PG-window averaging
};

// PG = sum of the thresholded, gated PDP. An all-zero PDP becomes a censored
// sample whose ceiling is one resolvable path sitting exactly at the threshold.
PathGainSample path_gain(const PowerDelayProfile &pdp, double distance, LosState los);

// Averages linear PG over windows of `window` metres of AP travel, separately
// per LOS state. Windows whose members are all censored stay censored.
std::vector<PathGainSample> average_path_gain(std::span<const PathGainSample> samples, double window);

// ---------- Delay spread ----------

// Second central moment of the PDP over delay = bin * delay_bin.
double rms_delay_spread(std::span<const double> power, double delay_bin);

struct DelaySpreadResult
{
    double value = 0.0; // s
    double dynamic_range_db = 0.0;
    bool excluded = false;
    std::string reason; // "low_dynamic_range" or "empty_pdp"
};

// Computes the delay spread only for PDPs with at least `min_dynamic_range_db`.
DelaySpreadResult rms_delay_spread(const PowerDelayProfile &pdp, double min_dynamic_range_db = 20.0);

inline double seconds_to_dbs(double seconds) { return 10.0 * std::log10(seconds); }

// ---------- Q-window / Q-tap ----------

inline constexpr double kaiser_broadening = 1.2;
inline constexpr double q_relative_tolerance = 1e-12;

// gamma = SIR / (SIR + 1) on a linear scale; throws if gamma rounds to 1.
double sir_to_gamma(double sir_db);

// Energy-summed decimation of the oversampled PDP to resolvable bins.
std::vector<double> resolvable_powers(const PowerDelayProfile &pdp);

// Shortest contiguous run of bins whose best placement holds gamma * PG.
// Returns 0 for an all-zero profile.
std::size_t q_window(std::span<const double> resolvable, double sir_db);

// Fewest bins (strongest first) holding gamma * PG.
std::size_t q_tap(std::span<const double> resolvable, double sir_db);

struct QParameters
{
    double sir_db = 0.0;
    std::size_t q_win = 0; // resolvable bins
    std::size_t q_tap = 0;
    double q_win_seconds = 0.0; // q_win * resolvable bin * Kaiser broadening
};

QParameters q_parameters(const PowerDelayProfile &pdp, double sir_db);

// ---------- Distributions ----------

struct Interval
{
    double lo = 0.0;
    double hi = 0.0;
};

struct NormalFit
{
    double mu = 0.0;
    double sigma = 0.0; // ML estimate (1/n)
    Interval mu_ci;
    Interval sigma_ci;
    double r_squared = 0.0;
    std::size_t n = 0;
};

// Gaussian ML fit of delay spreads on the dBs scale (log-normal in seconds).
// R^2 compares sorted samples with the fitted quantiles at (i - 0.5) / n.
NormalFit fit_ds_distribution(std::span<const double> ds_dbs, double confidence = 0.95);

// Alternative fit: a log-normal law for the magnitude |DS in dBs|.
NormalFit fit_ds_magnitude_lognormal(std::span<const double> ds_dbs, double confidence = 0.95);

struct DsSample
{
    double ds_dbs = 0.0;
    double distance = 0.0;
};

struct DsDistanceFit
{
    double slope = 0.0;            // dBs per dB of distance (vs 10 log10 d)
    double intercept = 0.0;        // dBs
    double slope_per_decade = 0.0; // dBs per decade of distance
    std::size_t n_bins = 0;
};

DsDistanceFit fit_ds_vs_distance(std::span<const DsSample> samples, double bin_width = 5.0);

class EmpiricalCdf
{
  public:
    explicit EmpiricalCdf(std::vector<double> samples);

    // Fraction of samples <= x.
    double cdf(double x) const;

    // Smallest sample x with cdf(x) >= p, p in (0, 1].
    double quantile(double p) const;

    std::size_t size() const { return sorted_.size(); }
    const std::vector<double> &sorted() const { return sorted_; }

  private:
    std::vector<double> sorted_;
};

// Lag distance at which the sample autocorrelation of a uniformly spaced
// series first drops to 1/e (linear interpolation between lags). NaN if it
// never does.
double decorrelation_distance(std::span<const double> series, double spacing);

} // namespace chansound
