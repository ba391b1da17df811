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
#include "chansound/fft.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace chansound
{

void TransferFunctionSnapshot::validate() const
{
    if (n_active == 0 || oversample == 0 || H.size() != n_active * oversample)
        throw DataError("transfer function length does not match subcarrier count");
    for (const auto &h : H)
        if (!std::isfinite(h.real()) || !std::isfinite(h.imag()))
            throw DataError("transfer function contains non-finite values");
}

CalibrationRecord CalibrationRecord::identity(std::size_t n_subcarriers)
{
    CalibrationRecord cal;
    cal.H_cal.assign(n_subcarriers, cplx{1.0, 0.0});
    return cal;
}

void CalibrationRecord::validate() const
{
    if (H_cal.empty())
        throw DataError("empty calibration record");
    for (std::size_t k = 0; k < H_cal.size(); ++k)
    {
        const double m = std::abs(H_cal[k]);
        if (!(m > 0.0) || !std::isfinite(m))
            throw DataError("zero calibration bin inside passband at subcarrier " + std::to_string(k));
    }
}

std::vector<double> kaiser_window(std::size_t n, double beta)
{
    std::vector<double> w(n, 1.0);
    if (n <= 1 || beta == 0.0)
        return w;
    const double norm = std::cyl_bessel_i(0.0, beta);
    for (std::size_t k = 0; k < n; ++k)
    {
        const double r = 2.0 * static_cast<double>(k) / static_cast<double>(n - 1) - 1.0;
        w[k] = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / norm;
    }
    return w;
}

TransferFunctionSnapshot window_and_pad(std::span<const cplx> H, const WaveformSpec &spec,
                                        const PreprocessConfig &cfg)
{
    const std::size_t n = H.size();
    if (n != spec.n_subcarriers)
        throw DataError("transfer function length does not match the waveform");
    if (cfg.oversample == 0)
        throw ConfigError("oversampling factor must be >= 1");
    const auto w = kaiser_window(n, cfg.kaiser_beta);
    const std::size_t L = n * cfg.oversample;

    TransferFunctionSnapshot out;
    out.subcarrier_spacing = spec.subcarrier_spacing;
    out.n_active = n;
    out.oversample = cfg.oversample;
    out.H.assign(L, cplx{0.0, 0.0});
    const std::size_t first = L / 2 - n / 2;
    double sum_w = 0.0;
    double sum_w2 = 0.0;
    for (std::size_t k = 0; k < n; ++k)
    {
        out.H[first + k] = H[k] * w[k];
        sum_w += w[k];
        sum_w2 += w[k] * w[k];
    }
    out.window_amplitude_gain = sum_w / static_cast<double>(n);
    out.window_power_gain = sum_w2 / static_cast<double>(n);
    return out;
}

namespace
{

TransferFunctionSnapshot finish_preprocessing(std::vector<cplx> averaged, std::span<const cplx> sounding,
                                              const WaveformSpec &spec, const CalibrationRecord &cal,
                                              std::size_t repetitions, const PreprocessConfig &cfg)
{
    const std::size_t n = spec.n_subcarriers;
    cal.validate();
    if (cal.H_cal.size() != n)
        throw DataError("calibration record length does not match the waveform");
    if (sounding.size() != n)
        throw DataError("sounding spectrum length does not match the waveform");
    for (std::size_t k = 0; k < n; ++k)
    {
        if (std::abs(sounding[k]) == 0.0)
            throw DataError("sounding spectrum has an empty subcarrier");
        averaged[k] /= sounding[k] * cal.H_cal[k];
    }
    auto out = window_and_pad(averaged, spec, cfg);
    out.repetition_count = repetitions;
    return out;
}

} // namespace

TransferFunctionSnapshot preprocess_burst(std::span<const cplx> burst, std::size_t repetitions,
                                          const SoundingWaveform &waveform, const CalibrationRecord &cal,
                                          const PreprocessConfig &cfg)
{
    const std::size_t n = waveform.spec.n_subcarriers;
    if (repetitions == 0 || burst.size() != repetitions * n)
        throw DataError("repetition count mismatch: burst of " + std::to_string(burst.size()) +
                        " samples is not " + std::to_string(repetitions) + " x " + std::to_string(n));
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));

    std::vector<cplx> avg(n, cplx{0.0, 0.0});
    for (std::size_t r = 0; r < repetitions; ++r)
    {
        const auto Y = fft_to_centered_order(fft_forward(burst.subspan(r * n, n)));
        for (std::size_t k = 0; k < n; ++k)
            avg[k] += Y[k];
    }
    for (auto &v : avg)
        v *= scale / static_cast<double>(repetitions);

    auto S = fft_to_centered_order(fft_forward(synthesize_period(waveform.subcarrier_phases, 1)));
    for (auto &v : S)
        v *= scale;
    return finish_preprocessing(std::move(avg), S, waveform.spec, cal, repetitions, cfg);
}

TransferFunctionSnapshot preprocess_spectra(std::span<const cplx> spectra, std::size_t repetitions,
                                            std::span<const cplx> sounding_spectrum, const WaveformSpec &spec,
                                            const CalibrationRecord &cal, const PreprocessConfig &cfg)
{
    const std::size_t n = spec.n_subcarriers;
    if (repetitions == 0 || spectra.size() != repetitions * n)
        throw DataError("repetition count mismatch: payload of " + std::to_string(spectra.size()) +
                        " values is not " + std::to_string(repetitions) + " x " + std::to_string(n));
    std::vector<cplx> avg(n, cplx{0.0, 0.0});
    for (std::size_t k = 0; k < n; ++k)
    {
        cplx acc{0.0, 0.0};
        for (std::size_t r = 0; r < repetitions; ++r)
            acc += spectra[k * repetitions + r];
        avg[k] = acc / static_cast<double>(repetitions);
    }
    return finish_preprocessing(std::move(avg), sounding_spectrum, spec, cal, repetitions, cfg);
}

double PowerDelayProfile::total_power() const
{
    return std::accumulate(power.begin(), power.end(), 0.0);
}

double PowerDelayProfile::peak_power() const
{
    return power.empty() ? 0.0 : *std::max_element(power.begin(), power.end());
}

PowerDelayProfile compute_pdp(const TransferFunctionSnapshot &H)
{
    H.validate();
    const std::size_t L = H.H.size();
    const auto h = fft_backward(centered_to_fft_order(H.H));
    const double norm = 1.0 / (static_cast<double>(L) * static_cast<double>(H.n_active) * H.window_power_gain);

    PowerDelayProfile pdp;
    pdp.snapshot = H.snapshot;
    pdp.receiver = H.receiver;
    pdp.timestamp = H.timestamp;
    pdp.power.resize(L);
    for (std::size_t n = 0; n < L; ++n)
        pdp.power[n] = std::norm(h[n]) * norm;
    pdp.oversample = H.oversample;
    pdp.delay_bin = 1.0 / (static_cast<double>(L) * H.subcarrier_spacing);
    pdp.resolvable_bin =
        H.n_active > 1 ? 1.0 / (static_cast<double>(H.n_active - 1) * H.subcarrier_spacing) : 1.0 / H.subcarrier_spacing;
    pdp.energy_per_peak = static_cast<double>(H.oversample) * H.window_power_gain /
                          (H.window_amplitude_gain * H.window_amplitude_gain);
    return pdp;
}

std::vector<SsaWindow> ssa_windows(std::span<const double> track_positions, double window, double stride,
                                   std::vector<std::size_t> *empty_windows)
{
    if (!(window > 0.0))
        throw std::invalid_argument("SSA window must be positive");
    if (stride <= 0.0)
        stride = window;
    std::vector<SsaWindow> out;
    if (track_positions.empty())
        return out;

    const auto [lo_it, hi_it] = std::minmax_element(track_positions.begin(), track_positions.end());
    const double s0 = *lo_it;
    const double s1 = *hi_it;
    for (std::size_t w = 0;; ++w)
    {
        const double center = s0 + 0.5 * window + static_cast<double>(w) * stride;
        const double lo = center - 0.5 * window;
        const double hi = center + 0.5 * window;
        if (lo > s1)
            break;
        SsaWindow info{w, center, {}};
        for (std::size_t i = 0; i < track_positions.size(); ++i)
            if (track_positions[i] >= lo && track_positions[i] < hi)
                info.members.push_back(i);
        if (info.members.empty())
        {
            if (empty_windows)
                empty_windows->push_back(w);
            continue;
        }
        out.push_back(std::move(info));
    }
    return out;
}

PowerDelayProfile average_pdps(std::span<const PowerDelayProfile> members)
{
    if (members.empty())
        throw std::invalid_argument("empty SSA window");
    std::vector<std::size_t> order(members.size());
    std::iota(order.begin(), order.end(), 0);
    // fixed summation order keeps the mean independent of input order
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (members[a].snapshot != members[b].snapshot)
            return members[a].snapshot < members[b].snapshot;
        return members[a].timestamp < members[b].timestamp;
    });

    const std::size_t n_bins = members.front().power.size();
    PowerDelayProfile avg = members[order.front()];
    std::fill(avg.power.begin(), avg.power.end(), 0.0);
    double t = 0.0;
    for (std::size_t i : order)
    {
        if (members[i].power.size() != n_bins)
            throw DataError("PDPs in an SSA window have different lengths");
        for (std::size_t b = 0; b < n_bins; ++b)
            avg.power[b] += members[i].power[b];
        t += members[i].timestamp;
    }
    const double inv = 1.0 / static_cast<double>(members.size());
    for (auto &p : avg.power)
        p *= inv;
    avg.timestamp = t * inv;
    return avg;
}

SsaResult ssa_average(std::span<const PowerDelayProfile> pdps, std::span<const double> track_positions, double window,
                      double stride)
{
    if (pdps.size() != track_positions.size())
        throw std::invalid_argument("one track position per PDP is required");
    SsaResult result;
    result.windows = ssa_windows(track_positions, window, stride, &result.empty_windows);
    for (const auto &w : result.windows)
    {
        std::vector<PowerDelayProfile> members;
        members.reserve(w.members.size());
        for (std::size_t i : w.members)
            members.push_back(pdps[i]);
        auto avg = average_pdps(members);
        avg.window = w.index;
        result.pdps.push_back(std::move(avg));
    }
    return result;
}

NoiseEstimate estimate_noise_floor(const PowerDelayProfile &pdp, double tail_fraction, std::size_t end_guard_bins)
{
    const std::size_t L = pdp.power.size();
    if (!(tail_fraction > 0.0) || tail_fraction > 1.0)
        throw std::invalid_argument("noise tail fraction must be in (0, 1]");
    const auto first = static_cast<std::size_t>(std::ceil((1.0 - tail_fraction) * static_cast<double>(L)));
    const std::size_t end = L - std::min(end_guard_bins, L);
    if (first >= end)
        throw std::invalid_argument("noise region empty");

    NoiseEstimate est;
    est.first_bin = first;
    est.n_bins = end - first;
    double sum = 0.0;
    for (std::size_t b = first; b < end; ++b)
        sum += pdp.power[b];
    est.value = sum / static_cast<double>(est.n_bins);
    const double peak = pdp.peak_power();
    est.near_numerical_floor = est.value <= 0.0 || est.value <= peak * 1e-15;
    return est;
}

void ThresholdConfig::validate() const
{
    if (!(delta_noise_db > 0.0) || !(delta_dynamic_range_db > 0.0) || !(gate_distance > 0.0) ||
        precursor_guard_bins == 0 || !(ssa_window > 0.0) || !(pg_window_wavelengths > 0.0))
        throw ConfigError("threshold configuration values must be positive");
    if (!(noise_tail_fraction > 0.0) || noise_tail_fraction > 1.0)
        throw ConfigError("noise tail fraction must be in (0, 1]");
}

nlohmann::json threshold_config_to_json(const ThresholdConfig &c)
{
    return {{"delta_noise_db", c.delta_noise_db},
            {"delta_dynamic_range_db", c.delta_dynamic_range_db},
            {"gate_distance", c.gate_distance},
            {"precursor_guard_bins", c.precursor_guard_bins},
            {"ssa_window", c.ssa_window},
            {"pg_window_wavelengths", c.pg_window_wavelengths},
            {"noise_tail_fraction", c.noise_tail_fraction}};
}

ThresholdConfig threshold_config_from_json(const nlohmann::json &j, const ThresholdConfig &d)
{
    ThresholdConfig c = d;
    c.delta_noise_db = j.value("delta_noise_db", c.delta_noise_db);
    c.delta_dynamic_range_db = j.value("delta_dynamic_range_db", c.delta_dynamic_range_db);
    c.gate_distance = j.value("gate_distance", c.gate_distance);
    c.precursor_guard_bins = j.value("precursor_guard_bins", c.precursor_guard_bins);
    c.ssa_window = j.value("ssa_window", c.ssa_window);
    c.pg_window_wavelengths = j.value("pg_window_wavelengths", c.pg_window_wavelengths);
    c.noise_tail_fraction = j.value("noise_tail_fraction", c.noise_tail_fraction);
    c.validate();
    return c;
}

namespace
{

double gated_peak(const PowerDelayProfile &pdp, double gate_delay)
{
    double peak = 0.0;
    for (std::size_t b = 0; b < pdp.power.size() && pdp.delay(b) <= gate_delay; ++b)
        peak = std::max(peak, pdp.power[b]);
    return peak;
}

} // namespace

double threshold_level(const PowerDelayProfile &pdp, const ThresholdConfig &cfg)
{
    if (std::isnan(pdp.noise_floor))
        throw std::invalid_argument("noise floor not estimated");
    const double noise_arm = pdp.noise_floor * from_db(cfg.delta_noise_db);
    const double dr_arm = gated_peak(pdp, cfg.gate_delay()) * from_db(-cfg.delta_dynamic_range_db);
    return std::max(noise_arm, dr_arm);
}

PowerDelayProfile threshold_and_gate(const PowerDelayProfile &pdp, const ThresholdConfig &cfg)
{
    PowerDelayProfile out = pdp;
    out.threshold = threshold_level(pdp, cfg);
    out.gate_delay = cfg.gate_delay();
    for (std::size_t b = 0; b < out.power.size(); ++b)
        if (out.delay(b) > out.gate_delay || out.power[b] < out.threshold)
            out.power[b] = 0.0;
    return out;
}

double dynamic_range_db(const PowerDelayProfile &pdp)
{
    if (std::isnan(pdp.noise_floor))
        throw std::invalid_argument("noise floor not estimated");
    return to_db(pdp.peak_power() / pdp.noise_floor);
}

PowerDelayProfile remove_precursors(const PowerDelayProfile &pdp, double los_delay, std::size_t guard_bins)
{
    if (los_delay > pdp.gate_delay)
        throw std::invalid_argument("LOS delay beyond the delay gate");
    PowerDelayProfile out = pdp;
    const double cut = los_delay - static_cast<double>(guard_bins) * pdp.resolvable_bin;
    for (std::size_t b = 0; b < out.power.size() && out.delay(b) < cut; ++b)
        out.power[b] = 0.0;
    return out;
}

} // namespace chansound
