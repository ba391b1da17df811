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

#include "chansound/campaign.hpp"

#include <fstream>
#include <initializer_list>

namespace chansound
{

namespace
{

void check_keys(const nlohmann::json &j, std::initializer_list<const char *> allowed, const std::string &section)
{
    if (!j.is_object())
        throw ConfigError("'" + section + "' must be an object");
    for (const auto &item : j.items())
    {
        bool known = false;
        for (const char *a : allowed)
            known = known || item.key() == a;
        if (!known)
            throw ConfigError("unknown key '" + section + (section.empty() ? "" : ".") + item.key() + "'");
    }
}

const char *phase_rule_name(PhaseRule rule)
{
    switch (rule)
    {
    case PhaseRule::newman:
        return "newman";
    case PhaseRule::quadratic:
        return "quadratic";
    case PhaseRule::zero:
        return "zero";
    case PhaseRule::user:
        return "user";
    }
    return "newman";
}

nlohmann::json optional_json(const std::optional<double> &v)
{
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> optional_from(const nlohmann::json &j, const char *key, std::optional<double> fallback)
{
    if (!j.contains(key))
        return fallback;
    if (j[key].is_null())
        return std::nullopt;
    return j[key].get<double>();
}

std::filesystem::path resolve(const std::filesystem::path &p, const std::filesystem::path &base)
{
    if (p.empty() || p.is_absolute() || base.empty())
        return p;
    return base / p;
}

} // namespace

void CampaignConfig::validate() const
{
    if (scenario_path.empty())
        throw ConfigError("no scenario file configured");
    if (!std::filesystem::exists(scenario_path))
        throw ConfigError("scenario file not found: " + scenario_path.string());
    if (fit.sir_db.empty())
        throw ConfigError("SIR list must not be empty");
    if (!(fit.pathloss_bin_width > 0.0) || !(fit.ds_bin_width > 0.0))
        throw ConfigError("bin widths must be positive");
    if (!(fit.outage_percentile > 0.0 && fit.outage_percentile <= 100.0))
        throw ConfigError("outage percentile must be in (0, 100]");
    if (!(fit.confidence > 0.0 && fit.confidence < 1.0))
        throw ConfigError("confidence must be in (0, 1)");
    if (jobs == 0)
        throw ConfigError("jobs must be >= 1");
    if (processing.preprocess.oversample == 0 || processing.preprocess.kaiser_beta < 0.0)
        throw ConfigError("invalid preprocessing settings");
    waveform.validate();
    impairments.validate();
    threshold.validate();
}

void apply_override(nlohmann::json &config, const std::string &assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override '" + assignment + "' is not of the form key.path=value");
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);

    nlohmann::json value = nlohmann::json::parse(text, nullptr, false);
    if (value.is_discarded())
        value = text;

    nlohmann::json *node = &config;
    std::size_t start = 0;
    while (true)
    {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty())
            throw ConfigError("empty component in override key '" + key + "'");
        if (!node->is_object())
        {
            if (!node->is_null())
                throw ConfigError("override '" + key + "' descends into a non-object");
            *node = nlohmann::json::object();
        }
        node = &(*node)[part];
        if (dot == std::string::npos)
            break;
        start = dot + 1;
    }
    *node = std::move(value);
}

CampaignConfig campaign_config_from_json(const nlohmann::json &j, const std::filesystem::path &base_dir)
{
    CampaignConfig c;
    try
    {
        check_keys(j, {"scenario", "output_dir", "seed", "jobs", "waveform", "synth", "impairments", "threshold",
                       "processing", "fit"},
                   "");
        c.scenario_path = resolve(j.value("scenario", std::string{}), base_dir);
        c.output_dir = resolve(j.value("output_dir", c.output_dir.string()), base_dir);
        c.seed = j.value("seed", c.seed);
        c.jobs = j.value("jobs", c.jobs);
        if (j.contains("waveform"))
            c.waveform = waveform_spec_from_json(j["waveform"]);
        if (j.contains("synth"))
        {
            const auto &s = j["synth"];
            check_keys(s, {"phase_rule", "system_ripple_db", "paths"}, "synth");
            c.synth.phase_rule = phase_rule_from_string(s.value("phase_rule", std::string("newman")));
            if (c.synth.phase_rule == PhaseRule::user)
                throw ConfigError("user phases cannot be given in a campaign config");
            c.synth.system_ripple_db = s.value("system_ripple_db", c.synth.system_ripple_db);
            if (s.contains("paths"))
                c.synth.paths = path_synth_config_from_json(s["paths"]);
        }
        if (j.contains("impairments"))
            c.impairments = impairment_config_from_json(j["impairments"]);
        if (j.contains("threshold"))
            c.threshold = threshold_config_from_json(j["threshold"]);
        if (j.contains("processing"))
        {
            const auto &p = j["processing"];
            check_keys(p, {"kaiser_beta", "oversample", "drift_correction", "drift_search_m",
                           "first_peak_window_db", "remove_precursors"},
                       "processing");
            c.processing.preprocess.kaiser_beta = p.value("kaiser_beta", c.processing.preprocess.kaiser_beta);
            c.processing.preprocess.oversample = p.value("oversample", c.processing.preprocess.oversample);
            c.processing.drift_correction = p.value("drift_correction", c.processing.drift_correction);
            c.processing.drift.search_half_width_m = p.value("drift_search_m", c.processing.drift.search_half_width_m);
            c.processing.drift.first_peak_window_db =
                p.value("first_peak_window_db", c.processing.drift.first_peak_window_db);
            c.processing.remove_precursors = p.value("remove_precursors", c.processing.remove_precursors);
        }
        if (j.contains("fit"))
        {
            const auto &f = j["fit"];
            check_keys(f, {"pathloss_bin_width", "ds_bin_width", "sir_db", "outage_percentile", "bootstrap",
                           "confidence", "min_dynamic_range_db", "pool_olos_into_los", "los_min_distance",
                           "los_max_distance", "nlos_min_distance", "nlos_max_distance"},
                       "fit");
            auto &o = c.fit;
            o.pathloss_bin_width = f.value("pathloss_bin_width", o.pathloss_bin_width);
            o.ds_bin_width = f.value("ds_bin_width", o.ds_bin_width);
            o.sir_db = f.value("sir_db", o.sir_db);
            o.outage_percentile = f.value("outage_percentile", o.outage_percentile);
            o.bootstrap = f.value("bootstrap", o.bootstrap);
            o.confidence = f.value("confidence", o.confidence);
            o.min_dynamic_range_db = f.value("min_dynamic_range_db", o.min_dynamic_range_db);
            o.pool_olos_into_los = f.value("pool_olos_into_los", o.pool_olos_into_los);
            o.los_min_distance = optional_from(f, "los_min_distance", o.los_min_distance);
            o.los_max_distance = optional_from(f, "los_max_distance", o.los_max_distance);
            o.nlos_min_distance = optional_from(f, "nlos_min_distance", o.nlos_min_distance);
            o.nlos_max_distance = optional_from(f, "nlos_max_distance", o.nlos_max_distance);
        }
    }
    catch (const nlohmann::json::exception &e)
    {
        throw ConfigError(std::string("malformed campaign config: ") + e.what());
    }
    c.validate();
    return c;
}

nlohmann::json campaign_config_to_json(const CampaignConfig &c)
{
    nlohmann::json j;
    j["scenario"] = c.scenario_path.generic_string();
    j["output_dir"] = c.output_dir.generic_string();
    j["seed"] = c.seed;
    j["jobs"] = c.jobs;
    j["waveform"] = waveform_spec_to_json(c.waveform);
    j["synth"] = {{"phase_rule", phase_rule_name(c.synth.phase_rule)},
                  {"system_ripple_db", c.synth.system_ripple_db},
                  {"paths", path_synth_config_to_json(c.synth.paths)}};
    j["impairments"] = impairment_config_to_json(c.impairments);
    j["threshold"] = threshold_config_to_json(c.threshold);
    j["processing"] = {{"kaiser_beta", c.processing.preprocess.kaiser_beta},
                       {"oversample", c.processing.preprocess.oversample},
                       {"drift_correction", c.processing.drift_correction},
                       {"drift_search_m", c.processing.drift.search_half_width_m},
                       {"first_peak_window_db", c.processing.drift.first_peak_window_db},
                       {"remove_precursors", c.processing.remove_precursors}};
    const auto &f = c.fit;
    j["fit"] = {{"pathloss_bin_width", f.pathloss_bin_width},
                {"ds_bin_width", f.ds_bin_width},
                {"sir_db", f.sir_db},
                {"outage_percentile", f.outage_percentile},
                {"bootstrap", f.bootstrap},
                {"confidence", f.confidence},
                {"min_dynamic_range_db", f.min_dynamic_range_db},
                {"pool_olos_into_los", f.pool_olos_into_los},
                {"los_min_distance", optional_json(f.los_min_distance)},
                {"los_max_distance", optional_json(f.los_max_distance)},
                {"nlos_min_distance", optional_json(f.nlos_min_distance)},
                {"nlos_max_distance", optional_json(f.nlos_max_distance)}};
    return j;
}

CampaignConfig load_campaign_config(const std::filesystem::path &path, std::span<const std::string> overrides)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config " + path.string());
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded())
        throw ConfigError("config is not valid JSON: " + path.string());
    for (const auto &o : overrides)
        apply_override(j, o);
    return campaign_config_from_json(j, path.parent_path());
}

} // namespace chansound
