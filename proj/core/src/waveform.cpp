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

#include "chansound/waveform.hpp"
#include "chansound/fft.hpp"

#include "binary_io.hpp"

#include <algorithm>
#include <fstream>

namespace chansound
{

double WaveformSpec::subcarrier_frequency(std::size_t k) const
{
    return center_frequency + static_cast<double>(baseband_offset(k)) * subcarrier_spacing;
}

long WaveformSpec::baseband_offset(std::size_t k) const
{
    return centered_offset(k, n_subcarriers);
}

void WaveformSpec::validate() const
{
    if (n_subcarriers == 0)
        throw ConfigError("waveform needs at least one subcarrier");
    if (!(subcarrier_spacing > 0.0))
        throw ConfigError("subcarrier spacing must be positive");
    if (!(center_frequency > 0.0))
        throw ConfigError("center frequency must be positive");
    if (repetitions_per_burst == 0)
        throw ConfigError("burst needs at least one repetition");
}

nlohmann::json waveform_spec_to_json(const WaveformSpec &spec)
{
    return {{"n_subcarriers", spec.n_subcarriers},
            {"subcarrier_spacing", spec.subcarrier_spacing},
            {"center_frequency", spec.center_frequency},
            {"repetitions_per_burst", spec.repetitions_per_burst},
            {"duration", spec.duration()},
            {"bandwidth", spec.bandwidth()}};
}

WaveformSpec waveform_spec_from_json(const nlohmann::json &j, const WaveformSpec &defaults)
{
    WaveformSpec s = defaults;
    s.n_subcarriers = j.value("n_subcarriers", s.n_subcarriers);
    s.subcarrier_spacing = j.value("subcarrier_spacing", s.subcarrier_spacing);
    s.center_frequency = j.value("center_frequency", s.center_frequency);
    s.repetitions_per_burst = j.value("repetitions_per_burst", s.repetitions_per_burst);
    s.validate();
    return s;
}

PhaseRule phase_rule_from_string(const std::string &name)
{
    if (name == "newman")
        return PhaseRule::newman;
    if (name == "quadratic" || name == "zadoff-chu")
        return PhaseRule::quadratic;
    if (name == "zero")
        return PhaseRule::zero;
    if (name == "user")
        return PhaseRule::user;
    throw ConfigError("unknown phase rule '" + name + "'");
}

std::vector<cplx> SoundingWaveform::spectrum() const
{
    std::vector<cplx> s(subcarrier_phases.size());
    for (std::size_t k = 0; k < s.size(); ++k)
        s[k] = std::polar(1.0, subcarrier_phases[k]);
    return s;
}

std::vector<double> multitone_phases(std::size_t n, PhaseRule rule, std::span<const double> user_phases)
{
    if (n == 0)
        throw std::invalid_argument("zero subcarriers");
    std::vector<double> phases(n, 0.0);
    const double dn = static_cast<double>(n);
    switch (rule)
    {
    case PhaseRule::newman:
        for (std::size_t k = 0; k < n; ++k)
        {
            // reduce k^2 mod 2N first so the phase stays accurate for large N
            const auto k2 = static_cast<double>((k * k) % (2 * n));
            phases[k] = pi * k2 / dn;
        }
        break;
    case PhaseRule::quadratic:
        for (std::size_t k = 0; k < n; ++k)
        {
            const auto kk = static_cast<double>((k * (k + 1)) % (2 * n));
            phases[k] = pi * kk / dn;
        }
        break;
    case PhaseRule::zero:
        break;
    case PhaseRule::user:
        if (user_phases.size() != n)
            throw std::invalid_argument("user phase sequence length does not match subcarrier count");
        std::copy(user_phases.begin(), user_phases.end(), phases.begin());
        break;
    }
    return phases;
}

std::vector<cplx> synthesize_period(std::span<const double> phases, std::size_t oversample)
{
    if (phases.empty())
        throw std::invalid_argument("zero subcarriers");
    if (oversample == 0)
        throw std::invalid_argument("oversampling factor must be >= 1");
    const std::size_t n = phases.size();
    const std::size_t L = n * oversample;
    std::vector<cplx> centered(L, cplx{0.0, 0.0});
    const std::size_t first = L / 2 - n / 2;
    for (std::size_t k = 0; k < n; ++k)
        centered[first + k] = std::polar(1.0, phases[k]);
    auto x = fft_backward(centered_to_fft_order(centered));
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (auto &v : x)
        v *= scale;
    return x;
}

SoundingWaveform generate_multitone(const WaveformSpec &spec, PhaseRule rule, std::span<const double> user_phases,
                                    std::size_t oversample)
{
    if (spec.n_subcarriers == 0)
        throw std::invalid_argument("zero subcarriers");
    if (!(spec.subcarrier_spacing > 0.0))
        throw std::invalid_argument("subcarrier spacing must be positive");
    SoundingWaveform w;
    w.spec = spec;
    w.subcarrier_phases = multitone_phases(spec.n_subcarriers, rule, user_phases);
    w.oversample = oversample;
    w.time_samples = synthesize_period(w.subcarrier_phases, oversample);
    return w;
}

double papr_db(std::span<const cplx> samples)
{
    if (samples.empty())
        throw std::invalid_argument("empty waveform");
    double peak = 0.0;
    double mean = 0.0;
    for (const auto &s : samples)
    {
        const double p = std::norm(s);
        peak = std::max(peak, p);
        mean += p;
    }
    mean /= static_cast<double>(samples.size());
    if (mean <= 0.0)
        throw std::invalid_argument("waveform has zero power");
    return to_db(peak / mean);
}

double papr_db(const SoundingWaveform &waveform, std::size_t oversample)
{
    if (waveform.subcarrier_phases.empty())
        throw std::invalid_argument("empty waveform");
    return papr_db(synthesize_period(waveform.subcarrier_phases, oversample));
}

void export_waveform(const SoundingWaveform &waveform, const std::filesystem::path &base)
{
    std::string payload;
    payload.reserve(waveform.time_samples.size() * 16);
    for (const auto &s : waveform.time_samples)
    {
        detail::append_le(payload, s.real());
        detail::append_le(payload, s.imag());
    }
    auto bin_path = base;
    bin_path += ".bin";
    std::ofstream bin(bin_path, std::ios::binary);
    if (!bin)
        throw DataError("cannot write " + bin_path.string());
    bin.write(payload.data(), static_cast<std::streamsize>(payload.size()));

    auto meta = waveform_spec_to_json(waveform.spec);
    meta["oversample"] = waveform.oversample;
    meta["n_samples"] = waveform.time_samples.size();
    meta["sample_rate"] = static_cast<double>(waveform.time_samples.size()) / waveform.spec.duration();
    meta["format"] = "float64 little-endian interleaved I/Q";
    meta["papr_db"] = papr_db(waveform.time_samples);
    auto json_path = base;
    json_path += ".json";
    std::ofstream js(json_path);
    if (!js)
        throw DataError("cannot write " + json_path.string());
    js << meta.dump(2) << '\n';
}

} // namespace chansound
