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
#include "chansound/waveform.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

namespace chansound
{

struct TransferFunctionSnapshot;

// Counter-based seed splitting: the stream for (master, a, b, c) does not
// depend on the order in which streams are requested.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

enum class PathType
{
    direct,
    reflection,
    diffraction,
    foliage,
    precursor
};

const char *to_string(PathType type);

struct PropagationPath
{
    double delay = 0.0; // s
    cplx amplitude;
    PathType type = PathType::reflection;
};

struct MultipathSet
{
    std::size_t snapshot = 0;
    std::size_t receiver = 0;
    std::vector<PropagationPath> paths; // sorted by delay
    LinkGeometry geometry;

    double total_power() const;
};

// Free parameters of the reflection-path generator. None of these are
// measured values; they are tuned to give plausible urban-microcell
// delay spreads of a few tens of ns.
struct PathSynthConfig
{
    std::size_t n_reflections = 8;
    double min_excess_delay = 8e-9;         // s, earliest reflection after the first arrival
    double mean_excess_delay = 60e-9;       // s, mean of the exponential excess-delay draw
    double decay_constant = 40e-9;          // s, single-exponential PDP tail
    double first_reflection_rel_db = -3.0;  // tail level at the first arrival, relative to it
    double nlos_excess_loss_db = 15.0;      // first NLOS arrival vs free space
    double nlos_onset_min = 5e-9;           // s, soft-onset lag of the first NLOS arrival
    double nlos_onset_max = 30e-9;
    double antenna_gain_db = 0.0;
};

nlohmann::json path_synth_config_to_json(const PathSynthConfig &cfg);
PathSynthConfig path_synth_config_from_json(const nlohmann::json &j, const PathSynthConfig &defaults = {});

double free_space_amplitude(double distance, double wavelength);

MultipathSet synth_paths(const Scenario &scenario, std::size_t snapshot, std::size_t receiver, std::uint64_t seed,
                         const PathSynthConfig &cfg = {});

// H(f_k) = sum_i a_i exp(-j 2 pi f_k tau_i) at the absolute subcarrier frequencies.
TransferFunctionSnapshot paths_to_transfer_function(const MultipathSet &paths, const WaveformSpec &spec);
std::vector<cplx> transfer_function(std::span<const PropagationPath> paths, const WaveformSpec &spec);

// ---------- Impairments ----------

struct NoiseConfig
{
    bool enabled = true;
    double floor_db = -95.0;           // per-subcarrier noise variance of one repetition, dB
    double floor_std_db = 0.0;         // spread of the floor between power-cycle segments
    std::size_t segment_snapshots = 0; // snapshots per power-cycle segment, 0 = one segment
};

struct ClockDriftConfig
{
    bool enabled = false;
    double linear_rate = 0.0;            // s/s
    double step_std_m = 0.0;             // random-walk innovation std per snapshot, m
    double decorrelation_distance = 10.0; // m of AP travel
};

struct PrecursorConfig
{
    bool enabled = false;
    double box_distance = 5.0;        // Tx antenna to Rx sounder box, m
    double relative_power_db = -10.0; // vs free space at the box distance
};

struct ImpairmentConfig
{
    NoiseConfig noise;
    ClockDriftConfig clock_drift;
    PrecursorConfig precursor;

    void validate() const;
};

nlohmann::json impairment_config_to_json(const ImpairmentConfig &cfg);
ImpairmentConfig impairment_config_from_json(const nlohmann::json &j, const ImpairmentConfig &defaults = {});

// Per-snapshot impairment state, shared by all receivers of the snapshot.
struct ImpairmentContext
{
    double drift_offset_m = 0.0; // extra delay expressed as distance
    double noise_floor_db = -95.0;
    double wavelength = 0.0;     // for the precursor amplitude; 0 = from spec
};

// Linear drift plus a Gauss-Markov deviation whose correlation decays as
// exp(-travel / decorrelation_distance).
struct DriftSeries
{
    std::vector<double> offset_m;    // total offset per snapshot
    std::vector<double> linear_m;    // linear part only
    std::vector<double> deviation_m; // Gauss-Markov part only
};

DriftSeries generate_drift(const ClockDriftConfig &cfg, std::span<const TrajectorySample> trajectory,
                           std::uint64_t seed);

// Gauss-Markov sequence along a 1-D coordinate, unit stationary variance.
std::vector<double> gauss_markov_field(std::span<const double> coordinate, double decorrelation_distance,
                                       std::mt19937_64 &rng);

std::vector<double> noise_floor_series(const NoiseConfig &cfg, std::size_t n_snapshots, std::uint64_t seed);

void add_precursor(std::span<cplx> H, const WaveformSpec &spec, const PrecursorConfig &cfg);
void apply_delay_offset(std::span<cplx> H, const WaveformSpec &spec, double offset_m);
void add_white_noise(std::span<cplx> H, double variance, std::mt19937_64 &rng);

// Precursor, then drift, then noise. Works on a single repetition.
TransferFunctionSnapshot inject_impairments(const TransferFunctionSnapshot &H, const WaveformSpec &spec,
                                            const ImpairmentConfig &cfg, const ImpairmentContext &ctx,
                                            std::uint64_t seed);

// ---------- Statistical channel generator ----------

struct StateChannelParams
{
    double alpha = 2.0;
    double beta_db = 40.0;
    double sigma_s_db = 4.0;
    double ds_mu_dbs = -75.0;
    double ds_sigma_dbs = 3.0;
    double validity_min = 0.0; // m
    double validity_max = 1e9; // m
};

struct StatChannelParams
{
    StateChannelParams los{2.0, 40.0, 4.0, -75.0, 3.0, 12.0, 178.0};
    StateChannelParams nlos{3.5, 30.0, 8.0, -72.0, 3.0, 20.0, 262.0};
    double shadowing_decorrelation = 10.0; // m

    // Throws on negative spreads; returns warnings (alpha outside [1, 6]).
    std::vector<std::string> validate() const;
};

struct StatLink
{
    std::size_t ue = 0;
    std::size_t ap_sample = 0;
    double distance = 0.0;
    LosState los = LosState::los;
    double shadowing_db = 0.0;
    double pathloss_db = 0.0;
    double path_gain_db = 0.0;
    double delay_spread = 0.0; // s
    bool outside_validity = false;
};

std::vector<StatLink> generate_stat_channels(const StatChannelParams &params, const Scenario &scenario,
                                             std::uint64_t seed);

} // namespace chansound
