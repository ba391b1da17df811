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

#include <limits>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace chansound
{

// Frequency response of one (snapshot, receiver) link in centered subcarrier
// order. After preprocessing H holds n_active * oversample bins with the
// active band in the middle and zeros on both sides.
struct TransferFunctionSnapshot
{
    std::size_t snapshot = 0;
    std::size_t receiver = 0;
    double timestamp = 0.0;
    std::size_t repetition_count = 1;
    double subcarrier_spacing = 125e3;
    std::size_t n_active = 0;
    std::size_t oversample = 1;
    double window_power_gain = 1.0;     // mean of w_k^2 over the active band
    double window_amplitude_gain = 1.0; // mean of w_k over the active band
    std::vector<cplx> H;

    void validate() const;
};

struct CalibrationRecord
{
    std::vector<cplx> H_cal; // subcarrier order
    int tx_port = 0;
    int rx_port = 0;

    static CalibrationRecord identity(std::size_t n_subcarriers);
    void validate() const;
};

struct PreprocessConfig
{
    double kaiser_beta = 3.0;
    std::size_t oversample = 10;
};

std::vector<double> kaiser_window(std::size_t n, double beta);

// Time-domain path: `burst` holds R consecutive periods of N critically sampled
// samples. Each repetition is transformed with a unitary FFT, the repetitions
// are averaged coherently, then divided by the sounding spectrum and H_cal,
// windowed and zero-padded.
TransferFunctionSnapshot preprocess_burst(std::span<const cplx> burst, std::size_t repetitions,
                                          const SoundingWaveform &waveform, const CalibrationRecord &cal,
                                          const PreprocessConfig &cfg = {});

// Frequency-domain path for data already transformed per repetition.
// `spectra` is frequency-major: spectra[k * R + r].
TransferFunctionSnapshot preprocess_spectra(std::span<const cplx> spectra, std::size_t repetitions,
                                            std::span<const cplx> sounding_spectrum, const WaveformSpec &spec,
                                            const CalibrationRecord &cal, const PreprocessConfig &cfg = {});

// Window and zero-pad an already calibrated subcarrier-order response.
TransferFunctionSnapshot window_and_pad(std::span<const cplx> H, const WaveformSpec &spec,
                                        const PreprocessConfig &cfg);

struct PowerDelayProfile
{
    std::size_t snapshot = 0; // first member snapshot for averaged PDPs
    std::size_t receiver = 0;
    std::size_t window = 0;
    double timestamp = 0.0;
    std::vector<double> power;   // linear, per oversampled delay bin
    double delay_bin = 0.0;      // s
    std::size_t oversample = 1;
    double resolvable_bin = 0.0; // 1 / bandwidth, s
    double energy_per_peak = 1.0; // PDP sum of one isolated path / its peak bin
    double noise_floor = std::numeric_limits<double>::quiet_NaN();
    double threshold = 0.0;
    double gate_delay = std::numeric_limits<double>::infinity();
    double dynamic_range_db = std::numeric_limits<double>::quiet_NaN();

    double delay(std::size_t bin) const { return static_cast<double>(bin) * delay_bin; }
    double total_power() const;
    double peak_power() const;
};

// P(n) = |sum_i H_i e^{j 2 pi o_i n / L}|^2 / (L * n_active * window_power_gain).
// This is the usual 1/N inverse DFT on the resolvable grid, extended so that
// zero-padding and windowing keep sum_n P(n) = (1/N) sum_k |H_k|^2 for a
// flat-magnitude response: one path of amplitude a contributes |a|^2.
PowerDelayProfile compute_pdp(const TransferFunctionSnapshot &H);

// Small-scale averaging over AP travel distance. Windows of `window` metres
// tile the track with the given stride starting at the first position.
struct SsaWindow
{
    std::size_t index = 0;
    double center = 0.0; // track position, m
    std::vector<std::size_t> members; // indices into the input sequence
};

struct SsaResult
{
    std::vector<PowerDelayProfile> pdps;
    std::vector<SsaWindow> windows;
    std::vector<std::size_t> empty_windows; // skipped, no member snapshots
};

SsaResult ssa_average(std::span<const PowerDelayProfile> pdps, std::span<const double> track_positions,
                      double window = 0.5, double stride = 0.0);

// Window tiling used by ssa_average, for callers that stream PDPs.
std::vector<SsaWindow> ssa_windows(std::span<const double> track_positions, double window, double stride,
                                   std::vector<std::size_t> *empty_windows = nullptr);

// Arithmetic mean in a fixed (snapshot-sorted) order.
PowerDelayProfile average_pdps(std::span<const PowerDelayProfile> members);

struct NoiseEstimate
{
    double value = 0.0;
    bool near_numerical_floor = false;
    std::size_t first_bin = 0;
    std::size_t n_bins = 0;
};

// Mean over the last tail_fraction of the delay range, optionally stopping
// end_guard_bins short of the end where negative delays wrap around.
NoiseEstimate estimate_noise_floor(const PowerDelayProfile &pdp, double tail_fraction = 0.2,
                                   std::size_t end_guard_bins = 0);

struct ThresholdConfig
{
    double delta_noise_db = 7.0;
    double delta_dynamic_range_db = 20.0;
    double gate_distance = 343.0; // m
    std::size_t precursor_guard_bins = 4;
    double ssa_window = 0.5;      // m
    double pg_window_wavelengths = 20.0;
    double noise_tail_fraction = 0.2;

    double gate_delay() const { return gate_distance / speed_of_light; }
    void validate() const;
};

nlohmann::json threshold_config_to_json(const ThresholdConfig &cfg);
ThresholdConfig threshold_config_from_json(const nlohmann::json &j, const ThresholdConfig &defaults = {});

// theta = max(P_n * 10^(dn/10), peak * 10^(-ddr/10)); the peak is taken over
// the gated region so that a second application is a no-op.
double threshold_level(const PowerDelayProfile &pdp, const ThresholdConfig &cfg);

PowerDelayProfile threshold_and_gate(const PowerDelayProfile &pdp, const ThresholdConfig &cfg);

// dynamic range = 10 log10(max P / P_n); requires noise_floor to be set.
double dynamic_range_db(const PowerDelayProfile &pdp);

PowerDelayProfile remove_precursors(const PowerDelayProfile &pdp, double los_delay, std::size_t guard_bins);

// ---------- Clock drift ----------

struct PeakEstimate
{
    bool found = false;
    double delay = 0.0; // s, sub-bin refined
    double power = 0.0;
};

// Strongest local maximum within [expected - half_width, expected + half_width],
// refined by a parabola through the three bins around it.
PeakEstimate find_peak_near(const PowerDelayProfile &pdp, double expected_delay, double half_width,
                            double first_peak_window_db = 6.0);

enum class DriftFlag
{
    anchor,          // LOS snapshot, measured directly
    interpolated,    // between two anchors
    extrapolated,    // beyond the first/last anchor: unreliable
    no_anchor        // no LOS snapshot at all: offset left at zero
};

const char *to_string(DriftFlag flag);

struct DriftCorrection
{
    std::vector<std::size_t> snapshots; // sorted, unique
    std::vector<double> timestamps;
    std::vector<double> offset_m;
    std::vector<DriftFlag> flags;

    double offset_for(std::size_t snapshot) const;
    DriftFlag flag_for(std::size_t snapshot) const;
};

struct DriftConfig
{
    double search_half_width_m = 15.0;
    double first_peak_window_db = 6.0; // earliest local maximum within this of the strongest
};

// First-peak measurement of one link, the input of the two-stage correction.
struct DriftObservation
{
    std::size_t snapshot = 0;
    double timestamp = 0.0;
    bool los = false;
    bool peak_found = false;
    double measured_offset_m = 0.0; // (first-peak delay - geometric delay) * c
};

DriftObservation observe_drift(const PowerDelayProfile &pdp, const LinkGeometry &geometry,
                               const DriftConfig &cfg = {});

DriftCorrection correct_clock_drift(std::span<const DriftObservation> observations);

// Stage 1: every snapshot with at least one LOS link is an anchor whose offset
// is the median of (first-peak delay - geometric delay) over its LOS links.
// Stage 2: other snapshots are interpolated linearly in time between anchors.
// `pdps` and `geometry` are parallel arrays.
DriftCorrection correct_clock_drift(std::span<const PowerDelayProfile> pdps, std::span<const LinkGeometry> geometry,
                                    const DriftConfig &cfg = {});

// Removes a delay offset by a linear phase ramp (exact sub-bin shift).
void apply_drift_correction(TransferFunctionSnapshot &H, double offset_m);

} // namespace chansound
