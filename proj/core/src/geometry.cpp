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

#include "chansound/geometry.hpp"
#include "chansound/common.hpp"

#include <algorithm>
#include <cmath>

namespace chansound
{

const char *to_string(LosState state)
{
    return state == LosState::los ? "LOS" : "NLOS";
}

LosState los_state_from_string(const std::string &s)
{
    if (s == "LOS")
        return LosState::los;
    if (s == "NLOS")
        return LosState::nlos;
    throw DataError("unknown LOS state '" + s + "'");
}

double link_distance(const Vec3 &a, const Vec3 &b)
{
    const Vec3 d = a - b;
    return std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z);
}

bool point_in_polygon(std::span<const Vec2> polygon, const Vec2 &p)
{
    bool inside = false;
    const std::size_t n = polygon.size();
    for (std::size_t i = 0, k = n - 1; i < n; k = i++)
    {
        const Vec2 &a = polygon[i];
        const Vec2 &b = polygon[k];
        if ((a.y > p.y) != (b.y > p.y))
        {
            const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < x_cross)
                inside = !inside;
        }
    }
    return inside;
}

namespace
{

double cross(const Vec2 &o, const Vec2 &a, const Vec2 &b)
{
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool segments_intersect(const Vec2 &p1, const Vec2 &p2, const Vec2 &q1, const Vec2 &q2)
{
    const double d1 = cross(q1, q2, p1);
    const double d2 = cross(q1, q2, p2);
    const double d3 = cross(p1, p2, q1);
    const double d4 = cross(p1, p2, q2);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    auto on_segment = [](const Vec2 &a, const Vec2 &b, const Vec2 &c)
    {
        return std::min(a.x, b.x) <= c.x && c.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= c.y &&
               c.y <= std::max(a.y, b.y);
    };
    if (d1 == 0 && on_segment(q1, q2, p1))
        return true;
    if (d2 == 0 && on_segment(q1, q2, p2))
        return true;
    if (d3 == 0 && on_segment(p1, p2, q1))
        return true;
    if (d4 == 0 && on_segment(p1, p2, q2))
        return true;
    return false;
}

// True if the 3-D segment a->b passes through the prism (footprint, height)
// at a point strictly below the prism top.
bool segment_hits_prism(std::span<const Vec2> footprint, double height, const Vec3 &a, const Vec3 &b)
{
    const Vec2 a2{a.x, a.y};
    const Vec2 d2{b.x - a.x, b.y - a.y};
    const double len2 = d2.x * d2.x + d2.y * d2.y;

    if (len2 < 1e-24)
        return point_in_polygon(footprint, a2) && std::min(a.z, b.z) < height;

    // Parameters where the projected segment crosses polygon edges
    std::vector<double> ts = {0.0, 1.0};
    const std::size_t n = footprint.size();
    for (std::size_t i = 0; i < n; ++i)
    {
        const Vec2 &p = footprint[i];
        const Vec2 &q = footprint[(i + 1) % n];
        const Vec2 e{q.x - p.x, q.y - p.y};
        const double denom = d2.x * e.y - d2.y * e.x;
        if (std::abs(denom) < 1e-18)
            continue;
        const Vec2 w{p.x - a2.x, p.y - a2.y};
        const double t = (w.x * e.y - w.y * e.x) / denom;
        const double s = (w.x * d2.y - w.y * d2.x) / denom;
        if (t > 0.0 && t < 1.0 && s >= 0.0 && s <= 1.0)
            ts.push_back(t);
    }
    std::sort(ts.begin(), ts.end());

    auto z_at = [&](double t) { return a.z + t * (b.z - a.z); };
    for (std::size_t i = 0; i + 1 < ts.size(); ++i)
    {
        const double t0 = ts[i];
        const double t1 = ts[i + 1];
        if (t1 - t0 < 1e-12)
            continue;
        const double tm = 0.5 * (t0 + t1);
        const Vec2 mid{a2.x + tm * d2.x, a2.y + tm * d2.y};
        if (!point_in_polygon(footprint, mid))
            continue;
        // Height is linear in t, so the lowest point inside is an interval end
        if (std::min(z_at(t0), z_at(t1)) < height)
            return true;
    }
    return false;
}

} // namespace

bool polygon_is_simple(std::span<const Vec2> polygon)
{
    const std::size_t n = polygon.size();
    if (n < 3)
        return false;
    for (std::size_t i = 0; i < n; ++i)
    {
        const Vec2 &a1 = polygon[i];
        const Vec2 &a2 = polygon[(i + 1) % n];
        if (a1.x == a2.x && a1.y == a2.y)
            return false;
        for (std::size_t k = i + 1; k < n; ++k)
        {
            // adjacent edges share a vertex by construction
            if (k == i + 1 || (i == 0 && k == n - 1))
                continue;
            const Vec2 &b1 = polygon[k];
            const Vec2 &b2 = polygon[(k + 1) % n];
            if (segments_intersect(a1, a2, b1, b2))
                return false;
        }
    }
    return true;
}

void Scenario::validate() const
{
    for (std::size_t i = 0; i < buildings.size(); ++i)
    {
        if (buildings[i].footprint.size() < 3)
            throw ConfigError("building " + std::to_string(i) + " has fewer than 3 vertices");
        if (!polygon_is_simple(buildings[i].footprint))
            throw ConfigError("building " + std::to_string(i) + " footprint is not a simple polygon");
        if (!(buildings[i].height > 0.0))
            throw ConfigError("building " + std::to_string(i) + " has non-positive height");
    }
    for (std::size_t i = 0; i < foliage.size(); ++i)
    {
        if (!polygon_is_simple(foliage[i].footprint))
            throw ConfigError("foliage patch " + std::to_string(i) + " footprint is not a simple polygon");
        if (foliage[i].excess_loss_db < 0.0)
            throw ConfigError("foliage patch " + std::to_string(i) + " has negative excess loss");
    }
    double max_ue_height = -INFINITY;
    for (const auto &ue : ues)
        max_ue_height = std::max(max_ue_height, ue.position.z);
    for (std::size_t m = 0; m < ap_trajectory.size(); ++m)
    {
        if (ap_trajectory[m].position.z <= max_ue_height)
            throw ConfigError("AP sample " + std::to_string(m) + " is not above every UE");
        if (m > 0 && !(ap_trajectory[m].time > ap_trajectory[m - 1].time))
            throw ConfigError("trajectory timestamps are not strictly increasing at sample " + std::to_string(m));
    }
    if (!(carrier_frequency > 0.0))
        throw ConfigError("carrier frequency must be positive");
}

double Scenario::wavelength() const
{
    return speed_of_light / carrier_frequency;
}

LinkVisibility assess_link(const Scenario &scenario, const Vec3 &ap, const Vec3 &ue)
{
    if (ap == ue)
        throw std::invalid_argument("coincident endpoints");

    LinkVisibility vis;
    for (const auto &b : scenario.buildings)
    {
        if (segment_hits_prism(b.footprint, b.height, ap, ue))
        {
            vis.state = LosState::nlos;
            break;
        }
    }
    for (const auto &f : scenario.foliage)
    {
        if (segment_hits_prism(f.footprint, f.height, ap, ue))
        {
            vis.foliage_obstructed = true;
            vis.foliage_loss_db += f.excess_loss_db;
        }
    }
    return vis;
}

LosState classify_los(const Scenario &scenario, const Vec3 &ap, const Vec3 &ue)
{
    return assess_link(scenario, ap, ue).state;
}

LinkGeometry link_geometry(const Scenario &scenario, std::size_t snapshot, std::size_t receiver)
{
    const Vec3 &ap = scenario.ap_trajectory.at(snapshot).position;
    const Vec3 &ue = scenario.ues.at(receiver).position;
    const auto vis = assess_link(scenario, ap, ue);
    return {snapshot, receiver, link_distance(ap, ue), vis.state, vis.foliage_obstructed};
}

std::vector<double> track_distance(std::span<const TrajectorySample> trajectory)
{
    std::vector<double> s(trajectory.size(), 0.0);
    for (std::size_t m = 1; m < trajectory.size(); ++m)
        s[m] = s[m - 1] + link_distance(trajectory[m].position, trajectory[m - 1].position);
    return s;
}

std::vector<TrajectorySample> linear_trajectory(const Vec3 &start, const Vec3 &direction, double speed,
                                                double burst_rate, std::size_t n_samples)
{
    const double norm = std::sqrt(direction.x * direction.x + direction.y * direction.y + direction.z * direction.z);
    if (!(norm > 0.0) || !(speed > 0.0) || !(burst_rate > 0.0))
        throw ConfigError("trajectory needs a direction, a positive speed and a positive burst rate");
    const Vec3 unit = direction * (1.0 / norm);
    std::vector<TrajectorySample> out(n_samples);
    for (std::size_t m = 0; m < n_samples; ++m)
    {
        const double t = static_cast<double>(m) / burst_rate;
        out[m] = {start + unit * (speed * t), t};
    }
    return out;
}

} // namespace chansound
