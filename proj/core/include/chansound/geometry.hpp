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

#include <span>
#include <string>
#include <vector>

namespace chansound
{

struct Vec2
{
    double x = 0.0;
    double y = 0.0;
};

struct Vec3
{
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator-(const Vec3 &o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator+(const Vec3 &o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    bool operator==(const Vec3 &) const = default;
};

enum class LosState
{
    los,
    nlos
};

const char *to_string(LosState state);
LosState los_state_from_string(const std::string &s);

// Prism obstacle: simple polygon footprint extruded to a uniform height.
struct Building
{
    std::vector<Vec2> footprint;
    double height = 0.0;
};

// Soft obstruction (trees). Crossing it below its height costs a fixed excess
// attenuation but never turns a link NLOS.
struct FoliagePatch
{
    std::vector<Vec2> footprint;
    double height = 0.0;
    double excess_loss_db = 0.0;
};

struct TrajectorySample
{
    Vec3 position;
    double time = 0.0; // s
};

struct UserEquipment
{
    Vec3 position;
    int id = 0;
};

struct Scenario
{
    std::vector<Building> buildings;
    std::vector<FoliagePatch> foliage;
    std::vector<TrajectorySample> ap_trajectory;
    std::vector<UserEquipment> ues;
    double carrier_frequency = 3.5e9; // Hz
    std::string notes;

    // Throws ConfigError when an invariant is violated: polygons with fewer
    // than 3 vertices or self-intersections, AP samples not above every UE,
    // timestamps not strictly increasing.
    void validate() const;

    double wavelength() const;
};

// Visibility of a single AP-UE link.
struct LinkVisibility
{
    LosState state = LosState::los;
    bool foliage_obstructed = false; // OLOS flag
    double foliage_loss_db = 0.0;    // summed over crossed patches
};

struct LinkGeometry
{
    std::size_t snapshot = 0;
    std::size_t receiver = 0;
    double distance = 0.0; // 3-D Euclidean, m
    LosState los = LosState::los;
    bool olos = false;
};

double link_distance(const Vec3 &a, const Vec3 &b);

// NLOS iff the ground projection of the segment enters a building footprint
// while the segment is strictly below the building height.
LosState classify_los(const Scenario &scenario, const Vec3 &ap, const Vec3 &ue);

LinkVisibility assess_link(const Scenario &scenario, const Vec3 &ap, const Vec3 &ue);

LinkGeometry link_geometry(const Scenario &scenario, std::size_t snapshot, std::size_t receiver);

bool point_in_polygon(std::span<const Vec2> polygon, const Vec2 &p);
bool polygon_is_simple(std::span<const Vec2> polygon);

// Cumulative distance travelled along the AP trajectory, one entry per sample.
std::vector<double> track_distance(std::span<const TrajectorySample> trajectory);

// Straight constant-speed track sampled at the burst rate, starting at t = 0.
std::vector<TrajectorySample> linear_trajectory(const Vec3 &start, const Vec3 &direction, double speed,
                                                double burst_rate, std::size_t n_samples);

} // namespace chansound
