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

#include "chansound/pathloss_fit.hpp"
#include "chansound/scenario_io.hpp"
#include "chansound/snapshot_file.hpp"
#include "chansound/stats.hpp"

#include "binary_io.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iterator>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <thread>

namespace chansound
{

namespace fs = std::filesystem;
using nlohmann::json;

namespace
{

// Work distribution over independent items; each item writes its own outputs.
template <typename F> void parallel_for(std::size_t n, std::size_t jobs, F &&fn)
{
    jobs = std::max<std::size_t>(1, std::min(jobs, n));
    if (jobs == 1)
    {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < jobs; ++t)
        pool.emplace_back([&] {
            while (true)
            {
                const std::size_t i = next.fetch_add(1);
                if (i >= n)
                    return;
                try
                {
                    fn(i);
                }
                catch (...)
                {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                    next.store(n);
                }
            }
        });
    for (auto &th : pool)
        th.join();
    if (error)
        std::rethrow_exception(error);
}

void ensure_dir(const fs::path &dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw ConfigError("cannot create output directory " + dir.string());
}

void write_text(const fs::path &path, const std::string &text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw ConfigError("cannot write " + path.string());
    out << text;
}

void write_json(const fs::path &path, const json &j)
{
    write_text(path, j.dump(2) + "\n");
}

json read_json(const fs::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open " + path.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded())
        throw DataError("malformed JSON in " + path.string());
    return j;
}

std::string num(double v)
{
    if (std::isnan(v))
        return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

json finite_or_null(double v)
{
    return std::isfinite(v) ? json(v) : json(nullptr);
}

double number_or_nan(const json &j, const char *key)
{
    if (!j.contains(key) || j[key].is_null())
        return std::numeric_limits<double>::quiet_NaN();
    return j[key].get<double>();
}

// Emulated sounder response: gentle amplitude and phase ripple across the band.
CalibrationRecord system_response(const WaveformSpec &spec, double ripple_db)
{
    CalibrationRecord cal;
    const double n = static_cast<double>(spec.n_subcarriers);
    cal.H_cal.resize(spec.n_subcarriers);
    for (std::size_t k = 0; k < spec.n_subcarriers; ++k)
    {
        const double u = static_cast<double>(k) / n;
        const double amp_db = ripple_db * std::sin(2.0 * pi * 3.0 * u);
        const double phase = 0.2 * std::sin(2.0 * pi * 2.0 * u) + 0.5 * u;
        cal.H_cal[k] = std::polar(std::pow(10.0, amp_db / 20.0), phase);
    }
    return cal;
}

json calibration_to_json(const CalibrationRecord &cal)
{
    std::vector<double> re, im;
    re.reserve(cal.H_cal.size());
    im.reserve(cal.H_cal.size());
    for (const auto &h : cal.H_cal)
    {
        re.push_back(h.real());
        im.push_back(h.imag());
    }
    return {{"tx_port", cal.tx_port}, {"rx_port", cal.rx_port}, {"re", re}, {"im", im}};
}

CalibrationRecord calibration_from_json(const json &j)
{
    CalibrationRecord cal;
    try
    {
        const auto re = j.at("re").get<std::vector<double>>();
        const auto im = j.at("im").get<std::vector<double>>();
        if (re.size() != im.size())
            throw DataError("calibration record: re/im length mismatch");
        cal.tx_port = j.value("tx_port", 0);
        cal.rx_port = j.value("rx_port", 0);
        for (std::size_t k = 0; k < re.size(); ++k)
            cal.H_cal.emplace_back(re[k], im[k]);
    }
    catch (const json::exception &e)
    {
        throw DataError(std::string("malformed calibration record: ") + e.what());
    }
    cal.validate();
    return cal;
}

const char *state_name(LosState s)
{
    return s == LosState::los ? "LOS" : "NLOS";
}

// One reason per window, in order of precedence; empty when the window
// enters every statistic.
std::string exclusion_reason(const PdpRecord &r, const FitConfig &fit)
{
    if (r.drift_status == "extrapolated")
        return "drift_extrapolated";
    if (r.drift_status == "no_anchor")
        return "drift_no_anchor";
    if (r.olos && !fit.pool_olos_into_los)
        return "olos_not_pooled";
    if (!(r.pdp.total_power() > 0.0))
        return "censored";
    const double dr = std::isnan(r.pdp.dynamic_range_db) ? dynamic_range_db(r.pdp) : r.pdp.dynamic_range_db;
    if (dr < fit.min_dynamic_range_db)
        return "low_dynamic_range";
    return {};
}

bool excluded_from_pathloss(const std::string &reason)
{
    return reason == "drift_extrapolated" || reason == "drift_no_anchor" || reason == "olos_not_pooled";
}

json interval_json(const Interval &i)
{
    return json::array({finite_or_null(i.lo), finite_or_null(i.hi)});
}

json normal_fit_json(const NormalFit &f)
{
    return {{"mu", f.mu},
            {"sigma", f.sigma},
            {"mu_ci", interval_json(f.mu_ci)},
            {"sigma_ci", interval_json(f.sigma_ci)},
            {"r_squared", f.r_squared},
            {"n", f.n}};
}

} // namespace

// ---------- PDP records ----------

std::string window_id(std::size_t window, std::size_t receiver)
{
    char buf[48];
    std::snprintf(buf, sizeof buf, "w%06zu_rx%02zu", window, receiver);
    return buf;
}

void write_pdp_record(const fs::path &dir, const PdpRecord &r)
{
    std::string bin;
    bin.append("CPDP", 4);
    detail::append_le<std::uint32_t>(bin, 1);
    detail::append_le<std::uint64_t>(bin, r.pdp.power.size());
    for (double p : r.pdp.power)
        detail::append_le(bin, p);
    detail::append_le(bin, detail::fnv1a64(bin.data(), bin.size()));
    write_text(dir / (r.window_id + ".bin"), bin);

    const auto &p = r.pdp;
    json meta = {{"window_id", r.window_id},
                 {"receiver", p.receiver},
                 {"window", p.window},
                 {"first_snapshot", p.snapshot},
                 {"members", r.members},
                 {"timestamp", p.timestamp},
                 {"los_state", state_name(r.los)},
                 {"olos", r.olos},
                 {"distance", r.distance},
                 {"track_position", r.track_position},
                 {"delay_bin", p.delay_bin},
                 {"oversample", p.oversample},
                 {"resolvable_bin", p.resolvable_bin},
                 {"energy_per_peak", p.energy_per_peak},
                 {"noise_floor", finite_or_null(p.noise_floor)},
                 {"noise_near_numerical_floor", r.noise_near_numerical_floor},
                 {"threshold", p.threshold},
                 {"gate_delay", finite_or_null(p.gate_delay)},
                 {"dynamic_range_db", finite_or_null(p.dynamic_range_db)},
                 {"drift_status", r.drift_status},
                 {"total_bins", r.total_bins},
                 {"stored_bins", p.power.size()}};
    write_json(dir / (r.window_id + ".json"), meta);
}

PdpRecord read_pdp_record(const fs::path &dir, const std::string &id)
{
    const json meta = read_json(dir / (id + ".json"));
    std::ifstream in(dir / (id + ".bin"), std::ios::binary);
    if (!in)
        throw DataError("missing PDP array for " + id);
    const std::string bin((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bin.size() < 24 || bin.compare(0, 4, "CPDP") != 0)
        throw DataError("bad PDP array header in " + id);
    const auto n = detail::read_le<std::uint64_t>(bin.data() + 8);
    if (bin.size() != 16 + 8 * n + 8)
        throw DataError("PDP array length mismatch in " + id);
    if (detail::fnv1a64(bin.data(), 16 + 8 * n) != detail::read_le<std::uint64_t>(bin.data() + 16 + 8 * n))
        throw DataError("PDP array checksum mismatch in " + id);

    PdpRecord r;
    try
    {
        r.window_id = meta.at("window_id").get<std::string>();
        auto &p = r.pdp;
        p.power.resize(n);
        for (std::size_t b = 0; b < n; ++b)
            p.power[b] = detail::read_le<double>(bin.data() + 16 + 8 * b);
        p.receiver = meta.at("receiver").get<std::size_t>();
        p.window = meta.at("window").get<std::size_t>();
        p.snapshot = meta.at("first_snapshot").get<std::size_t>();
        p.timestamp = meta.at("timestamp").get<double>();
        p.delay_bin = meta.at("delay_bin").get<double>();
        p.oversample = meta.at("oversample").get<std::size_t>();
        p.resolvable_bin = meta.at("resolvable_bin").get<double>();
        p.energy_per_peak = meta.at("energy_per_peak").get<double>();
        p.noise_floor = number_or_nan(meta, "noise_floor");
        p.threshold = meta.at("threshold").get<double>();
        p.gate_delay = number_or_nan(meta, "gate_delay");
        if (std::isnan(p.gate_delay))
            p.gate_delay = std::numeric_limits<double>::infinity();
        p.dynamic_range_db = number_or_nan(meta, "dynamic_range_db");
        r.members = meta.at("members").get<std::vector<std::size_t>>();
        r.los = los_state_from_string(meta.at("los_state").get<std::string>());
        r.olos = meta.at("olos").get<bool>();
        r.distance = meta.at("distance").get<double>();
        r.track_position = meta.at("track_position").get<double>();
        r.drift_status = meta.at("drift_status").get<std::string>();
        r.noise_near_numerical_floor = meta.value("noise_near_numerical_floor", false);
        r.total_bins = meta.value("total_bins", n);
    }
    catch (const json::exception &e)
    {
        throw DataError("malformed PDP metadata for " + id + ": " + e.what());
    }
    return r;
}

// ---------- synth ----------

CommandSummary cmd_synth(const CampaignConfig &cfg)
{
    cfg.validate();
    Scenario scenario = load_scenario(cfg.scenario_path);
    scenario.validate();
    const WaveformSpec &spec = cfg.waveform;
    const auto dir = cfg.snapshot_dir();
    ensure_dir(dir);

    const auto S = generate_multitone(spec, cfg.synth.phase_rule).spectrum();
    const auto cal = system_response(spec, cfg.synth.system_ripple_db);
    write_json(dir / "calibration.json", calibration_to_json(cal));
    save_scenario(scenario, dir / "scenario.json");

    const std::size_t n_snap = scenario.ap_trajectory.size();
    const std::size_t n_rx = scenario.ues.size();
    const auto drift = generate_drift(cfg.impairments.clock_drift, scenario.ap_trajectory, cfg.seed);
    const auto floors = noise_floor_series(cfg.impairments.noise, n_snap, cfg.seed);
    const std::size_t R = spec.repetitions_per_burst;

    std::vector<json> link_truth(n_snap * n_rx);
    parallel_for(n_snap * n_rx, cfg.jobs, [&](std::size_t idx) {
        const std::size_t m = idx / n_rx;
        const std::size_t j = idx % n_rx;
        const auto paths = synth_paths(scenario, m, j, cfg.seed, cfg.synth.paths);
        auto H = transfer_function(paths.paths, spec);
        if (cfg.impairments.precursor.enabled)
            add_precursor(H, spec, cfg.impairments.precursor);
        if (cfg.impairments.clock_drift.enabled)
            apply_delay_offset(H, spec, drift.offset_m[m]);

        SnapshotFile file;
        file.header.snapshot = m;
        file.header.receiver = j;
        file.header.timestamp = scenario.ap_trajectory[m].time;
        file.header.n_subcarriers = spec.n_subcarriers;
        file.header.subcarrier_spacing = spec.subcarrier_spacing;
        file.header.repetitions = R;
        file.payload.resize(spec.n_subcarriers * R);

        std::mt19937_64 rng(derive_seed(cfg.seed, m, j, 4));
        std::normal_distribution<double> normal(0.0, std::sqrt(from_db(floors[m]) / 2.0));
        const bool noisy = cfg.impairments.noise.enabled;
        for (std::size_t k = 0; k < spec.n_subcarriers; ++k)
        {
            const cplx y = S[k] * cal.H_cal[k] * H[k];
            for (std::size_t r = 0; r < R; ++r)
            {
                cplx v = y;
                if (noisy)
                {
                    const double re = normal(rng);
                    const double im = normal(rng);
                    v += cplx{re, im};
                }
                file.payload[k * R + r] = v;
            }
        }
        write_snapshot_file(dir / snapshot_file_name(m, j), file);

        json plist = json::array();
        for (const auto &p : paths.paths)
            plist.push_back({{"delay", p.delay},
                             {"power_db", to_db(std::norm(p.amplitude))},
                             {"phase", std::arg(p.amplitude)},
                             {"type", to_string(p.type)}});
        link_truth[idx] = {{"snapshot", m},
                           {"receiver", j},
                           {"distance", paths.geometry.distance},
                           {"los_state", state_name(paths.geometry.los)},
                           {"olos", paths.geometry.olos},
                           {"total_power_db", to_db(paths.total_power())},
                           {"paths", plist}};
    });

    json snaps = json::array();
    const auto s = track_distance(scenario.ap_trajectory);
    for (std::size_t m = 0; m < n_snap; ++m)
    {
        const auto &p = scenario.ap_trajectory[m].position;
        snaps.push_back({{"snapshot", m},
                         {"timestamp", scenario.ap_trajectory[m].time},
                         {"ap", {p.x, p.y, p.z}},
                         {"track_position", s[m]},
                         {"drift_offset_m", drift.offset_m[m]},
                         {"drift_linear_m", drift.linear_m[m]},
                         {"drift_deviation_m", drift.deviation_m[m]},
                         {"noise_floor_db", floors[m]}});
    }
    write_json(dir / "ground_truth.json",
               {{"seed", cfg.seed}, {"waveform", waveform_spec_to_json(spec)}, {"snapshots", snaps},
                {"links", link_truth}});

    json files = json::array();
    for (std::size_t m = 0; m < n_snap; ++m)
        for (std::size_t j = 0; j < n_rx; ++j)
            files.push_back(snapshot_file_name(m, j));
    json manifest = {{"format_version", snapshot_format_version},
                     {"seed", cfg.seed},
                     {"waveform", waveform_spec_to_json(spec)},
                     {"n_snapshots", n_snap},
                     {"n_receivers", n_rx},
                     {"files", files}};
    write_json(dir / "manifest.json", manifest);

    CommandSummary summary;
    summary.outputs = n_snap * n_rx;
    return summary;
}

// ---------- process ----------

CommandSummary cmd_process(const CampaignConfig &cfg, const fs::path &input_dir)
{
    cfg.validate();
    Scenario scenario = load_scenario(cfg.scenario_path);
    scenario.validate();
    const WaveformSpec &spec = cfg.waveform;

    if (!fs::exists(input_dir / "calibration.json"))
        throw DataError("missing calibration record in " + input_dir.string());
    const CalibrationRecord cal = calibration_from_json(read_json(input_dir / "calibration.json"));
    if (cal.H_cal.size() != spec.n_subcarriers)
        throw DataError("calibration record length does not match the waveform");

    std::vector<fs::path> files;
    for (const auto &e : fs::directory_iterator(input_dir))
        if (e.is_regular_file() && e.path().extension() == ".csnp")
            files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw DataError("no snapshot files in " + input_dir.string());

    const auto S = generate_multitone(spec, cfg.synth.phase_rule).spectrum();
    const auto &pre = cfg.processing.preprocess;
    const std::size_t n_snap = scenario.ap_trajectory.size();
    const std::size_t n_rx = scenario.ues.size();

    // Pass 1: validate every file; measure first peaks on LOS links.
    struct FileState
    {
        bool ok = false;
        std::size_t snapshot = 0;
        std::size_t receiver = 0;
        double timestamp = 0.0;
        DriftObservation obs;
        LogEntry problem;
    };
    std::vector<FileState> state(files.size());
    parallel_for(files.size(), cfg.jobs, [&](std::size_t i) {
        auto &st = state[i];
        const auto name = files[i].filename().string();
        SnapshotFile f;
        try
        {
            f = read_snapshot_file(files[i]);
        }
        catch (const DataError &e)
        {
            st.problem = {name, "corrupt_file", e.what()};
            return;
        }
        const auto &h = f.header;
        if (h.n_subcarriers != spec.n_subcarriers || h.subcarrier_spacing != spec.subcarrier_spacing)
        {
            st.problem = {name, "header_mismatch", "waveform numerology differs from the configuration"};
            return;
        }
        if (h.snapshot >= n_snap || h.receiver >= n_rx)
        {
            st.problem = {name, "unknown_link", "snapshot or receiver index outside the scenario"};
            return;
        }
        st.ok = true;
        st.snapshot = h.snapshot;
        st.receiver = h.receiver;
        st.timestamp = h.timestamp;
        st.obs.snapshot = h.snapshot;
        st.obs.timestamp = h.timestamp;
        const auto geo = link_geometry(scenario, h.snapshot, h.receiver);
        if (cfg.processing.drift_correction && geo.los == LosState::los)
        {
            auto H = preprocess_spectra(f.payload, h.repetitions, S, spec, cal, pre);
            H.snapshot = h.snapshot;
            H.receiver = h.receiver;
            H.timestamp = h.timestamp;
            st.obs = observe_drift(compute_pdp(H), geo, cfg.processing.drift);
        }
    });

    CommandSummary summary;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> link_file; // (m, j) -> file index
    std::vector<DriftObservation> observations;
    for (std::size_t i = 0; i < files.size(); ++i)
    {
        const auto &st = state[i];
        if (!st.ok)
        {
            summary.warnings.push_back(st.problem);
            continue;
        }
        if (!link_file.emplace(std::make_pair(st.snapshot, st.receiver), i).second)
        {
            summary.warnings.push_back({files[i].filename().string(), "duplicate_link", "same (m, j) seen twice"});
            continue;
        }
        observations.push_back(st.obs);
    }

    DriftCorrection drift;
    if (cfg.processing.drift_correction)
        drift = correct_clock_drift(observations);

    const auto out_dir = cfg.pdp_dir();
    ensure_dir(out_dir);
    {
        json snaps = json::array();
        for (std::size_t i = 0; i < drift.snapshots.size(); ++i)
            snaps.push_back({{"snapshot", drift.snapshots[i]},
                             {"timestamp", drift.timestamps[i]},
                             {"offset_m", drift.offset_m[i]},
                             {"flag", to_string(drift.flags[i])}});
        write_json(out_dir / "drift_correction.json",
                   {{"enabled", cfg.processing.drift_correction}, {"snapshots", snaps}});
    }

    // Pass 2: SSA windows per receiver on a tiling shared by all receivers.
    const auto positions = track_distance(scenario.ap_trajectory);
    std::vector<std::size_t> empty;
    const auto windows = ssa_windows(positions, cfg.threshold.ssa_window, 0.0, &empty);

    struct Task
    {
        std::size_t receiver;
        const SsaWindow *window;
        std::vector<std::size_t> members; // snapshot indices with a valid file
    };
    std::vector<Task> tasks;
    std::vector<LogEntry> window_log;
    for (std::size_t j = 0; j < n_rx; ++j)
        for (const auto &w : windows)
        {
            Task t{j, &w, {}};
            for (std::size_t m : w.members)
                if (link_file.count({m, j}))
                    t.members.push_back(m);
            if (t.members.empty())
                window_log.push_back({window_id(w.index, j), "empty_window", "no readable snapshot"});
            else
                tasks.push_back(std::move(t));
        }

    std::vector<PdpRecord> records(tasks.size());
    parallel_for(tasks.size(), cfg.jobs, [&](std::size_t ti) {
        const auto &t = tasks[ti];
        std::vector<PowerDelayProfile> pdps;
        pdps.reserve(t.members.size());
        Vec3 ap_sum;
        int worst = 0; // 0 disabled/reliable, 1 extrapolated, 2 no anchor
        for (std::size_t m : t.members)
        {
            const auto f = read_snapshot_file(files[link_file.at({m, t.receiver})]);
            auto H = preprocess_spectra(f.payload, f.header.repetitions, S, spec, cal, pre);
            H.snapshot = m;
            H.receiver = t.receiver;
            H.timestamp = f.header.timestamp;
            if (cfg.processing.drift_correction)
            {
                apply_drift_correction(H, drift.offset_for(m));
                const auto flag = drift.flag_for(m);
                if (flag == DriftFlag::no_anchor)
                    worst = std::max(worst, 2);
                else if (flag == DriftFlag::extrapolated)
                    worst = std::max(worst, 1);
            }
            pdps.push_back(compute_pdp(H));
            ap_sum = ap_sum + scenario.ap_trajectory[m].position;
        }

        PdpRecord rec;
        rec.window_id = window_id(t.window->index, t.receiver);
        rec.members = t.members;
        rec.track_position = t.window->center;
        rec.drift_status = !cfg.processing.drift_correction ? "disabled"
                           : worst == 2                     ? "no_anchor"
                           : worst == 1                     ? "extrapolated"
                                                            : "reliable";
        const Vec3 ap = ap_sum * (1.0 / static_cast<double>(t.members.size()));
        const Vec3 &ue = scenario.ues[t.receiver].position;
        const auto vis = assess_link(scenario, ap, ue);
        rec.los = vis.state;
        rec.olos = vis.foliage_obstructed;
        rec.distance = link_distance(ap, ue);

        auto avg = average_pdps(pdps);
        avg.window = t.window->index;
        avg.receiver = t.receiver;
        // drift correction can move early energy to negative delays, i.e. the end of the record
        const std::size_t wrap_guard =
            cfg.processing.drift_correction
                ? static_cast<std::size_t>(std::ceil(cfg.processing.drift.search_half_width_m / speed_of_light /
                                                     avg.delay_bin)) +
                      cfg.threshold.precursor_guard_bins * avg.oversample
                : 0;
        const auto noise = estimate_noise_floor(avg, cfg.threshold.noise_tail_fraction, wrap_guard);
        avg.noise_floor = noise.value;
        rec.noise_near_numerical_floor = noise.near_numerical_floor;
        const double los_delay = rec.distance / speed_of_light;
        if (cfg.processing.remove_precursors && los_delay <= cfg.threshold.gate_delay())
            avg = remove_precursors(avg, los_delay, cfg.threshold.precursor_guard_bins);
        avg.dynamic_range_db = dynamic_range_db(avg);
        avg = threshold_and_gate(avg, cfg.threshold);

        rec.total_bins = avg.power.size();
        const auto keep = std::min<std::size_t>(
            avg.power.size(), static_cast<std::size_t>(std::floor(avg.gate_delay / avg.delay_bin)) + 1);
        avg.power.resize(keep);
        rec.pdp = std::move(avg);
        write_pdp_record(out_dir, rec);
        records[ti] = std::move(rec);
    });

    json index = json::array();
    json windows_json = json::array();
    for (const auto &r : records)
    {
        index.push_back(r.window_id);
        const auto reason = exclusion_reason(r, cfg.fit);
        windows_json.push_back({{"window_id", r.window_id},
                                {"los_state", state_name(r.los)},
                                {"members", r.members.size()},
                                {"drift_status", r.drift_status},
                                {"dynamic_range_db", finite_or_null(r.pdp.dynamic_range_db)},
                                {"noise_near_numerical_floor", r.noise_near_numerical_floor},
                                {"excluded", reason.empty() ? json(nullptr) : json(reason)}});
    }
    write_json(out_dir / "index.json", {{"records", index}});

    json warnings = json::array();
    for (const auto &w : summary.warnings)
        warnings.push_back({{"item", w.item}, {"reason", w.reason}, {"detail", w.detail}});
    json wlog = json::array();
    for (const auto &w : window_log)
        wlog.push_back({{"item", w.item}, {"reason", w.reason}, {"detail", w.detail}});
    write_json(out_dir / "processing_log.json",
               {{"files_read", files.size()},
                {"warnings", warnings},
                {"skipped_windows", wlog},
                {"windows", windows_json}});

    summary.outputs = records.size();
    return summary;
}

// ---------- stats ----------

CommandSummary cmd_stats(const CampaignConfig &cfg, const fs::path &pdp_dir)
{
    cfg.validate();
    if (!fs::exists(pdp_dir / "index.json"))
        throw DataError("no PDP records in " + pdp_dir.string());
    const json index = read_json(pdp_dir / "index.json");
    std::vector<std::string> ids;
    try
    {
        ids = index.at("records").get<std::vector<std::string>>();
    }
    catch (const json::exception &e)
    {
        throw DataError(std::string("malformed PDP index: ") + e.what());
    }
    if (ids.empty())
        throw DataError("empty input: no PDP records");

    std::vector<PdpRecord> records(ids.size());
    parallel_for(ids.size(), cfg.jobs, [&](std::size_t i) { records[i] = read_pdp_record(pdp_dir, ids[i]); });

    const auto &fit = cfg.fit;
    const double wavelength = speed_of_light / cfg.waveform.center_frequency;
    const LosState states[2] = {LosState::los, LosState::nlos};

    std::vector<LogEntry> exclusions;
    std::vector<PathGainSample> pg_samples;
    std::map<LosState, std::vector<double>> ds_dbs;
    std::map<LosState, std::vector<DsSample>> ds_dist;
    std::string qcsv = "window_id,state,sir_db,q_win,q_tap\n";
    std::string ds_csv = "window_id,state,distance_m,ds_dbs\n";
    // (state, sir index) -> samples
    std::map<std::pair<LosState, std::size_t>, std::vector<double>> q_win_bins, q_tap;

    for (const auto &r : records)
    {
        const auto reason = exclusion_reason(r, fit);
        if (!reason.empty())
            exclusions.push_back({r.window_id, reason, {}});
        if (excluded_from_pathloss(reason))
            continue;

        auto pg = path_gain(r.pdp, r.distance, r.los);
        pg.olos = r.olos;
        pg.track_position = r.track_position;
        pg_samples.push_back(pg);
        if (!reason.empty())
            continue;

        const auto ds = rms_delay_spread(r.pdp, fit.min_dynamic_range_db);
        const double dbs = seconds_to_dbs(ds.value);
        ds_dbs[r.los].push_back(dbs);
        ds_dist[r.los].push_back({dbs, r.distance});
        ds_csv += r.window_id + "," + state_name(r.los) + "," + num(r.distance) + "," + num(dbs) + "\n";

        for (std::size_t k = 0; k < fit.sir_db.size(); ++k)
        {
            const auto q = q_parameters(r.pdp, fit.sir_db[k]);
            q_win_bins[{r.los, k}].push_back(static_cast<double>(q.q_win));
            q_tap[{r.los, k}].push_back(static_cast<double>(q.q_tap));
            qcsv += r.window_id + "," + state_name(r.los) + "," + num(fit.sir_db[k]) + "," + std::to_string(q.q_win) +
                    "," + std::to_string(q.q_tap) + "\n";
        }
    }

    CommandSummary summary;
    const auto report = cfg.report_dir();
    ensure_dir(report);

    // path loss
    const auto averaged = average_path_gain(pg_samples, cfg.threshold.pg_window_wavelengths * wavelength);
    std::string pl_csv = "state,kind,distance_m,pathloss_db,censored\n";
    for (const auto &s : pg_samples)
    {
        const double pl = s.censored ? -to_db(s.ceiling) : -to_db(s.path_gain);
        pl_csv += std::string(state_name(s.los)) + ",ssa_window," + num(s.distance) + "," + num(pl) + "," +
                  (s.censored ? "1" : "0") + "\n";
    }
    for (const auto &s : averaged)
    {
        const double pl = s.censored ? -to_db(s.ceiling) : -to_db(s.path_gain);
        pl_csv += std::string(state_name(s.los)) + ",pg_window," + num(s.distance) + "," + num(pl) + "," +
                  (s.censored ? "1" : "0") + "\n";
    }

    json pl_json = json::object();
    for (LosState st : states)
    {
        const std::string name = state_name(st);
        std::vector<PathGainSample> subset;
        for (const auto &s : averaged)
            if (s.los == st)
                subset.push_back(s);
        if (subset.empty())
        {
            pl_json[name] = {{"status", "skipped"}, {"reason", "no_samples"}};
            continue;
        }
        PathlossFitOptions opt;
        opt.bin_width = fit.pathloss_bin_width;
        opt.bootstrap = fit.bootstrap;
        opt.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(st), 0, 7);
        opt.confidence = fit.confidence;
        opt.min_distance = st == LosState::los ? fit.los_min_distance : fit.nlos_min_distance;
        opt.max_distance = st == LosState::los ? fit.los_max_distance : fit.nlos_max_distance;
        try
        {
            const auto f = fit_pathloss(subset, st, opt);
            json block = {{"status", "ok"},
                          {"alpha", f.alpha},
                          {"beta_db", f.beta},
                          {"sigma_s_db", f.sigma_s},
                          {"alpha_ci", interval_json(f.alpha_ci)},
                          {"beta_ci", interval_json(f.beta_ci)},
                          {"sigma_s_ci", interval_json(f.sigma_ci)},
                          {"bin_width_m", f.bin_width},
                          {"validity_m", {f.validity_min, f.validity_max}},
                          {"n_samples", f.n_samples},
                          {"n_censored", f.n_censored},
                          {"n_bins", f.n_bins},
                          {"converged", f.converged}};
            for (double d = f.validity_min; d <= f.validity_max + 1e-9; d += f.bin_width)
                pl_csv += name + ",fit_line," + num(d) + "," + num(f.alpha * 10.0 * std::log10(d) + f.beta) + ",0\n";
            if (f.n_censored > 0)
            {
                auto naive_opt = opt;
                naive_opt.ignore_censored = true;
                naive_opt.bootstrap = 0;
                try
                {
                    const auto n = fit_pathloss(subset, st, naive_opt);
                    block["naive_ignoring_censored"] = {
                        {"alpha", n.alpha}, {"beta_db", n.beta}, {"sigma_s_db", n.sigma_s}};
                }
                catch (const std::exception &e)
                {
                    block["naive_ignoring_censored"] = {{"status", "failed"}, {"error", e.what()}};
                }
            }
            pl_json[name] = block;
        }
        catch (const std::exception &e)
        {
            pl_json[name] = {{"status", "failed"}, {"error", e.what()}};
            summary.failed_fits.push_back("pathloss." + name);
        }
    }
    write_json(report / "pathloss_fit.json", pl_json);
    write_text(report / "pathloss_samples.csv", pl_csv);

    // delay spread and Q parameters
    json ds_json = json::object();
    std::string cdf_ds = "state,ds_dbs,empirical_cdf,fitted_cdf\n";
    std::string cdf_q = "state,sir_db,metric,value,empirical_cdf\n";
    const double p_out = fit.outage_percentile / 100.0;
    const double resolvable_bin = records.front().pdp.resolvable_bin;
    for (LosState st : states)
    {
        const std::string name = state_name(st);
        const auto &v = ds_dbs[st];
        if (v.empty())
        {
            ds_json[name] = {{"status", "skipped"}, {"reason", "no_samples"}};
            continue;
        }
        json block = {{"status", "ok"}, {"n", v.size()}};
        const EmpiricalCdf cdf(v);
        block["median_dbs"] = cdf.quantile(0.5);
        std::optional<NormalFit> normal;
        try
        {
            normal = fit_ds_distribution(v, fit.confidence);
            block["normal_dbs"] = normal_fit_json(*normal);
        }
        catch (const std::exception &e)
        {
            block["normal_dbs"] = {{"status", "failed"}, {"error", e.what()}};
            summary.failed_fits.push_back("ds_normal." + name);
        }
        try
        {
            block["lognormal_magnitude"] = normal_fit_json(fit_ds_magnitude_lognormal(v, fit.confidence));
        }
        catch (const std::exception &e)
        {
            block["lognormal_magnitude"] = {{"status", "failed"}, {"error", e.what()}};
            summary.failed_fits.push_back("ds_lognormal_magnitude." + name);
        }
        try
        {
            const auto d = fit_ds_vs_distance(ds_dist[st], fit.ds_bin_width);
            block["vs_distance"] = {{"slope_per_db", d.slope},
                                    {"slope_per_decade", d.slope_per_decade},
                                    {"intercept_dbs", d.intercept},
                                    {"n_bins", d.n_bins},
                                    {"bin_width_m", fit.ds_bin_width}};
        }
        catch (const std::exception &e)
        {
            block["vs_distance"] = {{"status", "failed"}, {"error", e.what()}};
            summary.failed_fits.push_back("ds_vs_distance." + name);
        }
        const auto &sorted = cdf.sorted();
        for (std::size_t i = 0; i < sorted.size(); ++i)
        {
            const double fitted =
                normal && normal->sigma > 0.0
                    ? 0.5 * std::erfc(-(sorted[i] - normal->mu) / (normal->sigma * std::sqrt(2.0)))
                    : std::numeric_limits<double>::quiet_NaN();
            cdf_ds += name + "," + num(sorted[i]) + "," + num(static_cast<double>(i + 1) / sorted.size()) + "," +
                      num(fitted) + "\n";
        }

        json outage = json::array();
        for (std::size_t k = 0; k < fit.sir_db.size(); ++k)
        {
            const EmpiricalCdf qw(q_win_bins[{st, k}]);
            const EmpiricalCdf qt(q_tap[{st, k}]);
            outage.push_back({{"sir_db", fit.sir_db[k]},
                              {"percentile", fit.outage_percentile},
                              {"q_win", qw.quantile(p_out)},
                              {"q_win_s", qw.quantile(p_out) * resolvable_bin * kaiser_broadening},
                              {"q_tap", qt.quantile(p_out)},
                              {"q_win_median", qw.quantile(0.5)},
                              {"q_tap_median", qt.quantile(0.5)}});
            for (const auto *c : {&qw, &qt})
            {
                const char *metric = c == &qw ? "q_win" : "q_tap";
                const auto &xs = c->sorted();
                for (std::size_t i = 0; i < xs.size(); ++i)
                    cdf_q += name + "," + num(fit.sir_db[k]) + "," + metric + "," + num(xs[i]) + "," +
                             num(static_cast<double>(i + 1) / xs.size()) + "\n";
            }
        }
        block["q_outage"] = outage;
        ds_json[name] = block;
    }
    write_json(report / "ds_stats.json", ds_json);
    write_text(report / "cdf_ds.csv", cdf_ds);
    write_text(report / "cdf_q.csv", cdf_q);
    write_text(report / "qparams.csv", qcsv);
    write_text(report / "ds_samples.csv", ds_csv);

    std::string ex_csv = "window_id,reason\n";
    std::map<std::string, std::size_t> counts;
    for (const auto &e : exclusions)
    {
        ex_csv += e.item + "," + e.reason + "\n";
        ++counts[e.reason];
    }
    write_text(report / "exclusions.csv", ex_csv);

    json cfg_json = campaign_config_to_json(cfg);
    cfg_json.erase("output_dir");
    cfg_json.erase("jobs");
    cfg_json["scenario"] = cfg.scenario_path.filename().generic_string();
    write_json(report / "config.json", cfg_json);
    write_json(report / "summary.json", {{"records", records.size()},
                                         {"excluded", counts},
                                         {"failed_fits", summary.failed_fits},
                                         {"exit_code", summary.exit_code()}});
    summary.outputs = records.size();
    return summary;
}

CommandSummary cmd_all(const CampaignConfig &cfg)
{
    CommandSummary total = cmd_synth(cfg);
    const auto p = cmd_process(cfg, cfg.snapshot_dir());
    const auto s = cmd_stats(cfg, cfg.pdp_dir());
    total.warnings.insert(total.warnings.end(), p.warnings.begin(), p.warnings.end());
    total.warnings.insert(total.warnings.end(), s.warnings.begin(), s.warnings.end());
    total.failed_fits = s.failed_fits;
    total.outputs = s.outputs;
    return total;
}

} // namespace chansound
