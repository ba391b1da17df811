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

#include "chansound/fft.hpp"
#include "chansound/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace chansound
{

const char *to_string(DriftFlag flag)
{
    switch (flag)
    {
    case DriftFlag::anchor:
        return "anchor";
    case DriftFlag::interpolated:
        return "interpolated";
    case DriftFlag::extrapolated:
        return "extrapolated";
    case DriftFlag::no_anchor:
        return "no_anchor";
    }
    return "unknown";
}

PeakEstimate find_peak_near(const PowerDelayProfile &pdp, double expected_delay, double half_width,
                            double first_peak_window_db)
{
    PeakEstimate est;
    const std::size_t L = pdp.power.size();
    if (L < 3)
        return est;
    const double lo_d = std::max(0.0, expected_delay - half_width);
    const double hi_d = expected_delay + half_width;
    const auto lo = static_cast<std::size_t>(std::ceil(lo_d / pdp.delay_bin));
    const auto hi = std::min(L - 1, static_cast<std::size_t>(std::floor(hi_d / pdp.delay_bin)));

    std::vector<std::size_t> maxima;
    double strongest = 0.0;
    for (std::size_t b = std::max<std::size_t>(lo, 1); b <= hi && b + 1 < L; ++b)
    {
        const double p = pdp.power[b];
        if (p > 0.0 && p >= pdp.power[b - 1] && p >= pdp.power[b + 1])
        {
            maxima.push_back(b);
            strongest = std::max(strongest, p);
        }
    }
    if (maxima.empty())
        return est;
    // a reflection can beat the direct path when several add up; take the
    // earliest local maximum that is close to the strongest one
    const double floor = strongest * from_db(-first_peak_window_db);
    std::size_t best = maxima.front();
    for (std::size_t b : maxima)
        if (pdp.power[b] >= floor)
        {
            best = b;
            break;
        }

    est.found = true;
    est.power = pdp.power[best];
    double offset = 0.0;
    const double l = pdp.power[best - 1];
    const double r = pdp.power[best + 1];
    if (l > 0.0 && r > 0.0)
    {
        // parabola through log-power; the Kaiser mainlobe is close to Gaussian
        const double yl = std::log(l);
        const double yc = std::log(est.power);
        const double yr = std::log(r);
        const double denom = yl - 2.0 * yc + yr;
        if (denom < 0.0)
            offset = std::clamp(0.5 * (yl - yr) / denom, -0.5, 0.5);
    }
    est.delay = (static_cast<double>(best) + offset) * pdp.delay_bin;
    return est;
}

double DriftCorrection::offset_for(std::size_t snapshot) const
{
    const auto it = std::lower_bound(snapshots.begin(), snapshots.end(), snapshot);
    if (it == snapshots.end() || *it != snapshot)
        throw std::out_of_range("no drift offset for snapshot " + std::to_string(snapshot));
    return offset_m[static_cast<std::size_t>(it - snapshots.begin())];
}

DriftFlag DriftCorrection::flag_for(std::size_t snapshot) const
{
    const auto it = std::lower_bound(snapshots.begin(), snapshots.end(), snapshot);
    if (it == snapshots.end() || *it != snapshot)
        throw std::out_of_range("no drift offset for snapshot " + std::to_string(snapshot));
    return flags[static_cast<std::size_t>(it - snapshots.begin())];
}

DriftObservation observe_drift(const PowerDelayProfile &pdp, const LinkGeometry &geometry, const DriftConfig &cfg)
{
    DriftObservation obs;
    obs.snapshot = geometry.snapshot;
    obs.timestamp = pdp.timestamp;
    obs.los = geometry.los == LosState::los;
    if (!obs.los)
        return obs;
    const double geo_delay = geometry.distance / speed_of_light;
    const auto peak =
        find_peak_near(pdp, geo_delay, cfg.search_half_width_m / speed_of_light, cfg.first_peak_window_db);
    obs.peak_found = peak.found;
    if (peak.found)
        obs.measured_offset_m = (peak.delay - geo_delay) * speed_of_light;
    return obs;
}

DriftCorrection correct_clock_drift(std::span<const PowerDelayProfile> pdps, std::span<const LinkGeometry> geometry,
                                    const DriftConfig &cfg)
{
    if (pdps.size() != geometry.size())
        throw std::invalid_argument("one link geometry per PDP is required");
    std::vector<DriftObservation> obs;
    obs.reserve(pdps.size());
    for (std::size_t i = 0; i < pdps.size(); ++i)
        obs.push_back(observe_drift(pdps[i], geometry[i], cfg));
    return correct_clock_drift(obs);
}

DriftCorrection correct_clock_drift(std::span<const DriftObservation> observations)
{
    struct SnapshotState
    {
        double timestamp = 0.0;
        std::vector<double> los_offsets;
    };
    std::map<std::size_t, SnapshotState> by_snapshot;
    for (const auto &o : observations)
    {
        auto &state = by_snapshot[o.snapshot];
        state.timestamp = o.timestamp;
        if (o.los && o.peak_found)
            state.los_offsets.push_back(o.measured_offset_m);
    }

    DriftCorrection dc;
    for (auto &[snap, state] : by_snapshot)
    {
        dc.snapshots.push_back(snap);
        dc.timestamps.push_back(state.timestamp);
        if (state.los_offsets.empty())
        {
            dc.offset_m.push_back(0.0);
            dc.flags.push_back(DriftFlag::no_anchor);
            continue;
        }
        auto &v = state.los_offsets;
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        const double median = n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
        dc.offset_m.push_back(median);
        dc.flags.push_back(DriftFlag::anchor);
    }

    std::vector<std::size_t> anchors;
    for (std::size_t i = 0; i < dc.flags.size(); ++i)
        if (dc.flags[i] == DriftFlag::anchor)
            anchors.push_back(i);
    if (anchors.empty())
        return dc;

    std::size_t next = 0; // index into anchors of the first anchor after i
    for (std::size_t i = 0; i < dc.flags.size(); ++i)
    {
        while (next < anchors.size() && anchors[next] <= i)
            ++next;
        if (dc.flags[i] == DriftFlag::anchor)
            continue;
        const bool has_prev = next > 0;
        const bool has_next = next < anchors.size();
        if (has_prev && has_next)
        {
            const std::size_t a = anchors[next - 1];
            const std::size_t b = anchors[next];
            const double ta = dc.timestamps[a];
            const double tb = dc.timestamps[b];
            const double u = tb > ta ? (dc.timestamps[i] - ta) / (tb - ta) : 0.5;
            dc.offset_m[i] = dc.offset_m[a] + u * (dc.offset_m[b] - dc.offset_m[a]);
            dc.flags[i] = DriftFlag::interpolated;
        }
        else
        {
            dc.offset_m[i] = dc.offset_m[has_prev ? anchors[next - 1] : anchors[next]];
            dc.flags[i] = DriftFlag::extrapolated;
        }
    }
    return dc;
}

void apply_drift_correction(TransferFunctionSnapshot &H, double offset_m)
{
    const std::size_t L = H.H.size();
    const double tau = offset_m / speed_of_light;
    for (std::size_t i = 0; i < L; ++i)
    {
        const double f = static_cast<double>(centered_offset(i, L)) * H.subcarrier_spacing;
        H.H[i] *= std::polar(1.0, 2.0 * pi * f * tau);
    }
}

} // namespace chansound
