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
// Campaign orchestration: configuration, the synth -> process -> stats chain
// and report emission.

#pragma once

#include "chansound/geometry.hpp"
#include "chansound/pipeline.hpp"
#include "chansound/synth.hpp"
#include "chansound/waveform.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace chansound
{

struct SynthSection
{
    PathSynthConfig paths;
    PhaseRule phase_rule = PhaseRule::newman;
    double system_ripple_db = 0.5; // peak amplitude ripple of the emulated sounder response
};

struct ProcessingConfig
{
    PreprocessConfig preprocess;
    bool drift_correction = true;
    DriftConfig drift;
    bool remove_precursors = true;
};

struct FitConfig
{
    double pathloss_bin_width = 2.0; // m
    double ds_bin_width = 5.0;       // m
    std::vector<double> sir_db{5.0, 10.0, 15.0};
    double outage_percentile = 90.0;
    std::size_t bootstrap = 1000;
    double confidence = 0.95;
    double min_dynamic_range_db = 20.0;
    bool pool_olos_into_los = true;
    std::optional<double> los_min_distance;
    std::optional<double> los_max_distance;
    std::optional<double> nlos_min_distance;
    std::optional<double> nlos_max_distance;
};

struct CampaignConfig
{
    std::filesystem::path scenario_path;
    std::filesystem::path output_dir = "out";
    std::uint64_t seed = 1;
    std::size_t jobs = 1;
    WaveformSpec waveform;
    SynthSection synth;
    ImpairmentConfig impairments;
    ThresholdConfig threshold;
    ProcessingConfig processing;
    FitConfig fit;

    // Throws ConfigError: missing scenario file, empty SIR list, bad ranges.
    void validate() const;

    std::filesystem::path snapshot_dir() const { return output_dir / "snapshots"; }
    std::filesystem::path pdp_dir() const { return output_dir / "pdps"; }
    std::filesystem::path report_dir() const { return output_dir / "reports"; }
};

// "a.b.c=value"; value is parsed as JSON, falling back to a plain string.
void apply_override(nlohmann::json &config, const std::string &assignment);

// Relative paths are resolved against base_dir.
CampaignConfig campaign_config_from_json(const nlohmann::json &j, const std::filesystem::path &base_dir = {});
nlohmann::json campaign_config_to_json(const CampaignConfig &cfg);
CampaignConfig load_campaign_config(const std::filesystem::path &path,
                                    std::span<const std::string> overrides = {});

// One SSA-window PDP with its metadata. Power is stored up to the gate.
struct PdpRecord
{
    std::string window_id;
    PowerDelayProfile pdp;
    LosState los = LosState::los;
    bool olos = false;
    double distance = 0.0;       // m, AP window centroid to UE
    double track_position = 0.0; // m, window center
    std::vector<std::size_t> members;
    std::string drift_status = "disabled"; // disabled, reliable, extrapolated, no_anchor
    bool noise_near_numerical_floor = false;
    std::size_t total_bins = 0; // PDP length before truncation
};

std::string window_id(std::size_t window, std::size_t receiver);
void write_pdp_record(const std::filesystem::path &dir, const PdpRecord &record);
PdpRecord read_pdp_record(const std::filesystem::path &dir, const std::string &window_id);

struct LogEntry
{
    std::string item;   // file name or window id
    std::string reason; // machine-readable code
    std::string detail;
};

struct CommandSummary
{
    std::size_t outputs = 0;
    std::vector<LogEntry> warnings;
    std::vector<std::string> failed_fits;
    int exit_code() const { return failed_fits.empty() ? 0 : 4; }
};

// Snapshot files, calibration record, manifest and ground truth under snapshot_dir().
CommandSummary cmd_synth(const CampaignConfig &cfg);

// PDP records and the processing log under pdp_dir().
CommandSummary cmd_process(const CampaignConfig &cfg, const std::filesystem::path &input_dir);

// Report bundle under report_dir().
CommandSummary cmd_stats(const CampaignConfig &cfg, const std::filesystem::path &pdp_dir);

CommandSummary cmd_all(const CampaignConfig &cfg);

} // namespace chansound
