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
// chansound command line: synth, process, stats, all.

#include "chansound/campaign.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace
{

enum ExitCode
{
    exit_ok = 0,
    exit_config = 2,
    exit_data = 3,
    exit_fit = 4
};

void print_summary(const char *command, const chansound::CommandSummary &s)
{
    for (const auto &w : s.warnings)
        std::cerr << "warning: " << w.item << ": " << w.reason << (w.detail.empty() ? "" : " (" + w.detail + ")")
                  << "\n";
    for (const auto &f : s.failed_fits)
        std::cerr << "fit failed: " << f << "\n";
    std::cout << command << ": " << s.outputs << " outputs, " << s.warnings.size() << " warnings, "
              << s.failed_fits.size() << " failed fits\n";
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"chansound - wideband channel sounding post-processing and statistics"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> jobs;
    std::string input_dir;

    auto add_common = [&](CLI::App *sub) {
        sub->add_option("--config", config_path, "campaign configuration (JSON)")->required();
        sub->add_option("--seed", seed, "master seed, overrides the config");
        sub->add_option("--jobs", jobs, "worker threads");
        sub->add_option("--set", overrides, "override a config value, key.path=value")->take_all();
    };

    auto *synth = app.add_subcommand("synth", "synthesize snapshot files and ground truth");
    add_common(synth);
    auto *process = app.add_subcommand("process", "snapshot files to SSA-averaged PDP records");
    add_common(process);
    process->add_option("input", input_dir, "snapshot directory (default <outdir>/snapshots)");
    auto *stats = app.add_subcommand("stats", "PDP records to the report bundle");
    add_common(stats);
    stats->add_option("input", input_dir, "PDP directory (default <outdir>/pdps)");
    auto *all = app.add_subcommand("all", "synth, process and stats in sequence");
    add_common(all);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError &e)
    {
        app.exit(e);
        return exit_config;
    }

    try
    {
        if (seed)
            overrides.push_back("seed=" + std::to_string(*seed));
        if (jobs)
            overrides.push_back("jobs=" + std::to_string(*jobs));
        const auto cfg = chansound::load_campaign_config(config_path, overrides);

        chansound::CommandSummary summary;
        const char *name = "";
        if (synth->parsed())
        {
            name = "synth";
            summary = chansound::cmd_synth(cfg);
        }
        else if (process->parsed())
        {
            name = "process";
            summary = chansound::cmd_process(cfg, input_dir.empty() ? cfg.snapshot_dir() : std::filesystem::path(input_dir));
        }
        else if (stats->parsed())
        {
            name = "stats";
            summary = chansound::cmd_stats(cfg, input_dir.empty() ? cfg.pdp_dir() : std::filesystem::path(input_dir));
        }
        else
        {
            name = "all";
            summary = chansound::cmd_all(cfg);
        }
        print_summary(name, summary);
        return summary.failed_fits.empty() ? exit_ok : exit_fit;
    }
    catch (const chansound::ConfigError &e)
    {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    }
    catch (const chansound::DataError &e)
    {
        std::cerr << "data error: " << e.what() << "\n";
        return exit_data;
    }
    catch (const chansound::FitError &e)
    {
        std::cerr << "fit error: " << e.what() << "\n";
        return exit_fit;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return exit_data;
    }
}
