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

#include "chansound/scenario_io.hpp"
#include "chansound/common.hpp"

#include <fstream>

namespace chansound
{

namespace
{

nlohmann::json polygon_to_json(const std::vector<Vec2> &poly)
{
    auto arr = nlohmann::json::array();
    for (const auto &v : poly)
        arr.push_back({v.x, v.y});
    return arr;
}

std::vector<Vec2> polygon_from_json(const nlohmann::json &arr)
{
    std::vector<Vec2> poly;
    for (const auto &v : arr)
    {
        if (!v.is_array() || v.size() != 2)
            throw ConfigError("polygon vertex must be [x, y]");
        poly.push_back({v[0].get<double>(), v[1].get<double>()});
    }
    return poly;
}

} // namespace

nlohmann::json scenario_to_json(const Scenario &scenario)
{
    nlohmann::json j;
    j["buildings"] = nlohmann::json::array();
    for (const auto &b : scenario.buildings)
        j["buildings"].push_back({{"vertices", polygon_to_json(b.footprint)}, {"height", b.height}});
    j["foliage"] = nlohmann::json::array();
    for (const auto &f : scenario.foliage)
        j["foliage"].push_back(
            {{"vertices", polygon_to_json(f.footprint)}, {"height", f.height}, {"loss_db", f.excess_loss_db}});
    j["ap_trajectory"] = nlohmann::json::array();
    for (const auto &s : scenario.ap_trajectory)
        j["ap_trajectory"].push_back(
            {{"x", s.position.x}, {"y", s.position.y}, {"z", s.position.z}, {"t", s.time}});
    j["ues"] = nlohmann::json::array();
    for (const auto &u : scenario.ues)
        j["ues"].push_back({{"x", u.position.x}, {"y", u.position.y}, {"z", u.position.z}, {"id", u.id}});
    j["carrier_frequency"] = scenario.carrier_frequency;
    j["notes"] = scenario.notes;
    return j;
}

Scenario scenario_from_json(const nlohmann::json &j)
{
    Scenario s;
    try
    {
        for (const auto &b : j.value("buildings", nlohmann::json::array()))
            s.buildings.push_back({polygon_from_json(b.at("vertices")), b.at("height").get<double>()});
        for (const auto &f : j.value("foliage", nlohmann::json::array()))
            s.foliage.push_back({polygon_from_json(f.at("vertices")), f.at("height").get<double>(),
                                 f.value("loss_db", 0.0)});
        for (const auto &p : j.at("ap_trajectory"))
            s.ap_trajectory.push_back(
                {{p.at("x").get<double>(), p.at("y").get<double>(), p.at("z").get<double>()}, p.at("t").get<double>()});
        int next_id = 0;
        for (const auto &u : j.at("ues"))
        {
            const int id = u.value("id", next_id);
            s.ues.push_back({{u.at("x").get<double>(), u.at("y").get<double>(), u.at("z").get<double>()}, id});
            next_id = id + 1;
        }
        s.carrier_frequency = j.value("carrier_frequency", 3.5e9);
        s.notes = j.value("notes", std::string{});
    }
    catch (const nlohmann::json::exception &e)
    {
        throw ConfigError(std::string("malformed scenario: ") + e.what());
    }
    s.validate();
    return s;
}

Scenario load_scenario(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open scenario file " + path.string());
    nlohmann::json j;
    try
    {
        in >> j;
    }
    catch (const nlohmann::json::exception &e)
    {
        throw ConfigError("cannot parse scenario file " + path.string() + ": " + e.what());
    }
    return scenario_from_json(j);
}

void save_scenario(const Scenario &scenario, const std::filesystem::path &path)
{
    std::ofstream out(path);
    if (!out)
        throw DataError("cannot write scenario file " + path.string());
    out << scenario_to_json(scenario).dump(2) << '\n';
}

} // namespace chansound
