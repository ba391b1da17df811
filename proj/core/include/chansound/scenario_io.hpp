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

#include <filesystem>
#include <nlohmann/json.hpp>

namespace chansound
{

// JSON layout (meters, seconds):
//   {"buildings":[{"vertices":[[x,y],...],"height":h}],
//    "foliage":[{"vertices":[[x,y],...],"height":h,"loss_db":l}],
//    "ap_trajectory":[{"x":..,"y":..,"z":..,"t":..}],
//    "ues":[{"x":..,"y":..,"z":..,"id":..}],
//    "carrier_frequency":3.5e9, "notes":"..."}
nlohmann::json scenario_to_json(const Scenario &scenario);
Scenario scenario_from_json(const nlohmann::json &j);

Scenario load_scenario(const std::filesystem::path &path);
void save_scenario(const Scenario &scenario, const std::filesystem::path &path);

} // namespace chansound
