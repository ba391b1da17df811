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
#include "chansound/scenario_io.hpp"
#include "chansound/snapshot_file.hpp"
#include "test_support.hpp"

#include <catch_amalgamated.hpp>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

using namespace chansound;
using namespace chansound::test;
namespace fs = std::filesystem;

namespace
{

// Two LOS receivers south of the track, two behind a wall to the north.
Scenario small_street(std::size_t n_snapshots)
{
    Scenario s = street_scenario(n_snapshots, {{2.0, -30.0, 1.5}, {4.0, -60.0, 1.5}, {2.0, 40.0, 1.5}, {3.0, 70.0, 1.5}});
    s.buildings.push_back(box_building(-20.0, 10.0, 30.0, 15.0, 30.0));
    return s;
}

CampaignConfig small_config(const fs::path &dir, std::size_t n_snapshots, std::uint64_t seed = 7)
{
    save_scenario(small_street(n_snapshots), dir / "scenario.json");
    CampaignConfig c;
    c.scenario_path = dir / "scenario.json";
    c.output_dir = dir / "out";
    c.seed = seed;
    c.waveform.n_subcarriers = 401;
    c.waveform.repetitions_per_burst = 2;
    c.impairments.clock_drift.enabled = true;
    c.impairments.clock_drift.linear_rate = 2e-9;
    c.impairments.clock_drift.step_std_m = 0.05;
    c.impairments.precursor.enabled = true;
    c.fit.bootstrap = 50;
    return c;
}

std::vector<std::string> csv_lines(const fs::path &p)
{
    std::istringstream in(read_file(p));
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);)
        if (!line.empty())
            lines.push_back(line);
    return lines;
}

nlohmann::json read_json_file(const fs::path &p)
{
    return nlohmann::json::parse(read_file(p));
}

std::map<std::string, std::string> tree_contents(const fs::path &root)
{
    std::map<std::string, std::string> out;
    for (const auto &e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file())
            out[fs::relative(e.path(), root).generic_string()] = read_file(e.path());
    return out;
}

} // namespace

TEST_CASE("snapshot files round-trip and reject corruption", "[campaign][io]")
{
    SnapshotFile f;
    f.header.snapshot = 12;
    f.header.receiver = 3;
    f.header.timestamp = 1.25;
    f.header.n_subcarriers = 5;
    f.header.subcarrier_spacing = 125e3;
    f.header.repetitions = 2;
    for (int i = 0; i < 10; ++i)
        f.payload.emplace_back(0.1 * i, -0.3 * i + 1e-17);

    const std::string bytes = encode_snapshot(f);
    const SnapshotFile g = decode_snapshot(bytes);
    CHECK(g.header.snapshot == 12);
    CHECK(g.header.receiver == 3);
    CHECK(g.header.timestamp == 1.25);
    CHECK(g.header.n_subcarriers == 5);
    CHECK(g.header.repetitions == 2);
    REQUIRE(g.payload.size() == f.payload.size());
    for (std::size_t i = 0; i < f.payload.size(); ++i)
        CHECK(g.payload[i] == f.payload[i]);

    SECTION("flipped payload byte")
    {
        std::string bad = bytes;
        bad[snapshot_header_bytes + 7] ^= 0x40;
        CHECK_THROWS_AS(decode_snapshot(bad), DataError);
    }
    SECTION("bad magic")
    {
        std::string bad = bytes;
        bad[0] = 'X';
        CHECK_THROWS_AS(decode_snapshot(bad), DataError);
    }
    SECTION("truncated")
    {
        CHECK_THROWS_AS(decode_snapshot(std::string_view(bytes).substr(0, bytes.size() - 9)), DataError);
        CHECK_THROWS_AS(decode_snapshot(std::string_view(bytes).substr(0, 20)), DataError);
    }
    SECTION("payload length mismatch")
    {
        SnapshotFile h = f;
        h.payload.pop_back();
        CHECK_THROWS_AS(encode_snapshot(h), DataError);
    }
}

TEST_CASE("config overrides and validation", "[campaign][config]")
{
    TempDir tmp("cs_cfg");
    save_scenario(small_street(10), tmp.path() / "scenario.json");

    nlohmann::json j = {{"scenario", "scenario.json"}, {"seed", 3}, {"fit", {{"sir_db", {5, 10}}}}};
    apply_override(j, "seed=11");
    apply_override(j, "waveform.n_subcarriers=401");
    apply_override(j, "fit.sir_db=[1,2,3]");
    apply_override(j, "output_dir=results");
    CHECK(j["seed"] == 11);
    CHECK(j["output_dir"] == "results");

    const CampaignConfig c = campaign_config_from_json(j, tmp.path());
    CHECK(c.seed == 11);
    CHECK(c.waveform.n_subcarriers == 401);
    CHECK(c.fit.sir_db == std::vector<double>{1, 2, 3});
    CHECK(c.scenario_path == tmp.path() / "scenario.json");
    CHECK(c.output_dir == tmp.path() / "results");

    // Serialized config parses back to the same settings.
    const CampaignConfig d = campaign_config_from_json(campaign_config_to_json(c));
    CHECK(campaign_config_to_json(d) == campaign_config_to_json(c));

    CHECK_THROWS_AS(apply_override(j, "novalue"), ConfigError);
    CHECK_THROWS_AS(apply_override(j, "=3"), ConfigError);
    CHECK_THROWS_AS(apply_override(j, "seed.x=3"), ConfigError);

    auto with = [&](const std::string &o) {
        nlohmann::json k = j;
        apply_override(k, o);
        return campaign_config_from_json(k, tmp.path());
    };
    CHECK_THROWS_AS(with("bogus=1"), ConfigError);
    CHECK_THROWS_AS(with("fit.bogus=1"), ConfigError);
    CHECK_THROWS_AS(with("fit.sir_db=[]"), ConfigError);
    CHECK_THROWS_AS(with("fit.confidence=1.5"), ConfigError);
    CHECK_THROWS_AS(with("jobs=0"), ConfigError);
    CHECK_THROWS_AS(with("scenario=missing.json"), ConfigError);
    CHECK_THROWS_AS(with("seed=\"abc\""), ConfigError);

    std::ofstream(tmp.path() / "c.json") << j.dump();
    const std::vector<std::string> overrides{"seed=99"};
    CHECK(load_campaign_config(tmp.path() / "c.json", overrides).seed == 99);
    std::ofstream(tmp.path() / "broken.json") << "{ not json";
    CHECK_THROWS_AS(load_campaign_config(tmp.path() / "broken.json"), ConfigError);
    CHECK_THROWS_AS(load_campaign_config(tmp.path() / "nope.json"), ConfigError);
}

TEST_CASE("synth writes one file per link and is reproducible", "[campaign][synth]")
{
    TempDir a("cs_synth_a");
    TempDir b("cs_synth_b");
    const CampaignConfig ca = small_config(a.path(), 10);
    const CampaignConfig cb = small_config(b.path(), 10);

    // Eight receivers: the four of the small street plus four more LOS ones.
    Scenario s = load_scenario(ca.scenario_path);
    for (int k = 0; k < 4; ++k)
        s.ues.push_back({{5.0 * k, -20.0 - 10.0 * k, 1.5}, 10 + k});
    save_scenario(s, ca.scenario_path);
    save_scenario(s, cb.scenario_path);

    const auto sa = cmd_synth(ca);
    const auto sb = cmd_synth(cb);
    CHECK(sa.outputs == 80);
    std::size_t n_files = 0;
    for (const auto &e : fs::directory_iterator(ca.snapshot_dir()))
        n_files += e.path().extension() == ".csnp";
    CHECK(n_files == 80);
    CHECK(tree_contents(ca.output_dir) == tree_contents(cb.output_dir));

    const auto truth = read_json_file(ca.snapshot_dir() / "ground_truth.json");
    CHECK(truth["links"].size() == 80);
    CHECK(truth["snapshots"].size() == 10);

    // A different seed changes the data.
    TempDir c("cs_synth_c");
    CampaignConfig cc = small_config(c.path(), 10, 8);
    save_scenario(s, cc.scenario_path);
    cmd_synth(cc);
    CHECK(read_file(cc.snapshot_dir() / snapshot_file_name(3, 1)) !=
          read_file(ca.snapshot_dir() / snapshot_file_name(3, 1)));
}

TEST_CASE("process builds SSA windows and tolerates bad files", "[campaign][process]")
{
    TempDir tmp("cs_proc");
    const CampaignConfig cfg = small_config(tmp.path(), 100);
    cmd_synth(cfg);

    const std::string victim = snapshot_file_name(42, 0);
    {
        std::string bytes = read_file(cfg.snapshot_dir() / victim);
        bytes[bytes.size() / 2] ^= 0x01;
        std::ofstream(cfg.snapshot_dir() / victim, std::ios::binary) << bytes;
    }

    const auto summary = cmd_process(cfg, cfg.snapshot_dir());
    bool logged = false;
    for (const auto &w : summary.warnings)
        logged = logged || (w.item == victim && w.reason == "corrupt_file");
    CHECK(logged);

    const auto log = read_json_file(cfg.pdp_dir() / "processing_log.json");
    CHECK(log["files_read"] == 400);
    bool in_log = false;
    for (const auto &w : log["warnings"])
        in_log = in_log || (w["item"] == victim && w["reason"] == "corrupt_file");
    CHECK(in_log);

    // 100 snapshots at 0.05 m spacing cover 5 m of track: ten 0.5 m windows per receiver.
    std::map<std::size_t, std::size_t> per_rx;
    std::size_t members = 0;
    for (const auto &w : log["windows"])
    {
        const std::string id = w["window_id"];
        ++per_rx[std::stoul(id.substr(id.find("_rx") + 3))];
        members += w["members"].get<std::size_t>();
    }
    REQUIRE(per_rx.size() == 4);
    for (const auto &[rx, n] : per_rx)
        CHECK(n == 10);
    CHECK(members == 399);

    // LOS windows: the first peak sits at the geometric delay of the window centroid.
    const auto index = read_json_file(cfg.pdp_dir() / "index.json");
    std::size_t n_los = 0;
    for (const auto &id : index["records"])
    {
        const PdpRecord r = read_pdp_record(cfg.pdp_dir(), id.get<std::string>());
        CHECK(r.total_bins >= r.pdp.power.size());
        if (r.los != LosState::los)
            continue;
        ++n_los;
        CHECK(r.drift_status == "reliable");
        const double expected = r.distance / speed_of_light;
        const auto peak = find_peak_near(r.pdp, expected, 3.0 * r.pdp.resolvable_bin);
        REQUIRE(peak.found);
        CHECK(std::abs(peak.delay - expected) < 0.5 * r.pdp.resolvable_bin);
    }
    CHECK(n_los == 20);

    SECTION("records are byte-identical on rerun")
    {
        const auto first = tree_contents(cfg.pdp_dir());
        cmd_process(cfg, cfg.snapshot_dir());
        CHECK(tree_contents(cfg.pdp_dir()) == first);
    }
    SECTION("missing calibration")
    {
        fs::remove(cfg.snapshot_dir() / "calibration.json");
        CHECK_THROWS_AS(cmd_process(cfg, cfg.snapshot_dir()), DataError);
    }
    SECTION("no snapshot files")
    {
        TempDir empty("cs_empty");
        fs::copy_file(cfg.snapshot_dir() / "calibration.json", empty.path() / "calibration.json");
        CHECK_THROWS_AS(cmd_process(cfg, empty.path()), DataError);
    }
}

TEST_CASE("stats writes per-state fits and a consistent exclusion log", "[campaign][stats]")
{
    TempDir tmp("cs_stats");
    CampaignConfig cfg = small_config(tmp.path(), 300);
    cfg.fit.min_dynamic_range_db = 25.0;
    const auto summary = cmd_all(cfg);
    const auto report = cfg.report_dir();

    const auto pl = read_json_file(report / "pathloss_fit.json");
    REQUIRE(pl.contains("LOS"));
    REQUIRE(pl.contains("NLOS"));
    CHECK(pl["LOS"]["status"] == "ok");
    CHECK(pl["NLOS"]["status"] == "ok");

    // One qparams row per (window, SIR) for each of the three SIR strata.
    std::map<std::string, std::set<std::string>> windows_per_sir;
    const auto q = csv_lines(report / "qparams.csv");
    REQUIRE(q.size() > 1);
    CHECK(q[0] == "window_id,state,sir_db,q_win,q_tap");
    for (std::size_t i = 1; i < q.size(); ++i)
    {
        std::istringstream row(q[i]);
        std::string id, state, sir;
        std::getline(row, id, ',');
        std::getline(row, state, ',');
        std::getline(row, sir, ',');
        windows_per_sir[sir].insert(id);
    }
    CHECK(windows_per_sir.size() == 3);
    std::set<std::size_t> sizes;
    for (const auto &[sir, ids] : windows_per_sir)
        sizes.insert(ids.size());
    CHECK(sizes.size() == 1);

    // Every excluded window appears exactly once with the reason the processing log gives.
    const auto log = read_json_file(cfg.pdp_dir() / "processing_log.json");
    std::map<std::string, std::string> expected;
    for (const auto &w : log["windows"])
        if (!w["excluded"].is_null())
            expected[w["window_id"]] = w["excluded"];
    std::map<std::string, std::string> listed;
    const auto ex = csv_lines(report / "exclusions.csv");
    CHECK(ex[0] == "window_id,reason");
    for (std::size_t i = 1; i < ex.size(); ++i)
    {
        const auto comma = ex[i].find(',');
        const std::string id = ex[i].substr(0, comma);
        CHECK(listed.count(id) == 0);
        listed[id] = ex[i].substr(comma + 1);
    }
    CHECK(listed == expected);

    const auto s = read_json_file(report / "summary.json");
    CHECK(s["exit_code"] == summary.exit_code());
    CHECK(s["records"] == log["windows"].size());

    SECTION("empty input")
    {
        TempDir empty("cs_empty_pdp");
        CHECK_THROWS_AS(cmd_stats(cfg, empty.path()), DataError);
        std::ofstream(empty.path() / "index.json") << R"({"records": []})";
        CHECK_THROWS_AS(cmd_stats(cfg, empty.path()), DataError);
    }
}
