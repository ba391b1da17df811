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

#include "chansound/common.hpp"

#include <filesystem>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

namespace chansound
{

// Multitone sounding numerology. Subcarrier k (0-based) sits at
// center_frequency + (k - N/2) * subcarrier_spacing (integer division).
struct WaveformSpec
{
    std::size_t n_subcarriers = 2801;
    double subcarrier_spacing = 125e3;  // Hz
    double center_frequency = 3.5e9;    // Hz
    std::size_t repetitions_per_burst = 10;

    double duration() const { return 1.0 / subcarrier_spacing; }

    // Span between first and last tone. Differs from N * spacing by one spacing.
    double bandwidth() const
    {
        return n_subcarriers > 1 ? static_cast<double>(n_subcarriers - 1) * subcarrier_spacing : subcarrier_spacing;
    }

    double resolvable_delay() const { return 1.0 / bandwidth(); }
    double unambiguous_range() const { return speed_of_light * duration(); }
    double subcarrier_frequency(std::size_t k) const;
    long baseband_offset(std::size_t k) const;

    void validate() const;
};

nlohmann::json waveform_spec_to_json(const WaveformSpec &spec);
WaveformSpec waveform_spec_from_json(const nlohmann::json &j, const WaveformSpec &defaults = {});

enum class PhaseRule
{
    newman,    // phi_k = pi k^2 / N
    quadratic, // Zadoff-Chu-like, phi_k = pi k (k + 1) / N
    zero,      // all tones in phase (worst case, reference only)
    user
};

PhaseRule phase_rule_from_string(const std::string &name);

struct SoundingWaveform
{
    WaveformSpec spec;
    std::vector<double> subcarrier_phases; // radians, one per subcarrier
    std::size_t oversample = 1;
    std::vector<cplx> time_samples;        // one period, N * oversample samples

    // Unit-magnitude spectrum exp(j phi_k) in subcarrier order.
    std::vector<cplx> spectrum() const;
};

std::vector<double> multitone_phases(std::size_t n_subcarriers, PhaseRule rule,
                                     std::span<const double> user_phases = {});

// One period of sum_k exp(j phi_k) exp(j 2 pi o_k n / (N os)) / sqrt(N).
std::vector<cplx> synthesize_period(std::span<const double> phases, std::size_t oversample);

SoundingWaveform generate_multitone(const WaveformSpec &spec, PhaseRule rule = PhaseRule::newman,
                                    std::span<const double> user_phases = {}, std::size_t oversample = 1);

double papr_db(std::span<const cplx> samples);

// PAPR re-evaluated on a grid `oversample` times denser than critical sampling.
double papr_db(const SoundingWaveform &waveform, std::size_t oversample);

// Writes <base>.bin (little-endian interleaved float64 I/Q) and <base>.json.
void export_waveform(const SoundingWaveform &waveform, const std::filesystem::path &base);

} // namespace chansound
