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

#include "chansound/synth.hpp"
#include "chansound/pipeline.hpp"

#include <algorithm>
#include <cmath>

namespace chansound
{

namespace
{

std::uint64_t splitmix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// phase of exp(-j 2 pi f tau) reduced before multiplying by 2 pi
cplx delay_phasor(double frequency, double delay)
{
    const double cycles = frequency * delay;
    const double frac = cycles - std::floor(cycles);
    return std::polar(1.0, -2.0 * pi * frac);
}

} // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b, std::uint64_t c)
{
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ a);
    h = splitmix64(h ^ (b + 0x632be59bd9b4e019ULL));
    h = splitmix64(h ^ (c + 0x8cb92ba72f3d8dd7ULL));
    return h;
}

const char *to_string(PathType type)
{
    switch (type)
    {
    case PathType::direct:
        return "direct";
    case PathType::reflection:
        return "reflection";
    case PathType::diffraction:
        return "diffraction";
    case PathType::foliage:
        return "foliage";
    case PathType::precursor:
        return "precursor";
    }
    return "unknown";
}

double MultipathSet::total_power() const
{
    double p = 0.0;
    for (const auto &path : paths)
        p += std::norm(path.amplitude);
    return p;
}

nlohmann::json path_synth_config_to_json(const PathSynthConfig &c)
{
    return {{"n_reflections", c.n_reflections},
            {"min_excess_delay", c.min_excess_delay},
            {"mean_excess_delay", c.mean_excess_delay},
            {"decay_constant", c.decay_constant},
            {"first_reflection_rel_db", c.first_reflection_rel_db},
            {"nlos_excess_loss_db", c.nlos_excess_loss_db},
            {"nlos_onset_min", c.nlos_onset_min},
            {"nlos_onset_max", c.nlos_onset_max},
            {"antenna_gain_db", c.antenna_gain_db}};
}

PathSynthConfig path_synth_config_from_json(const nlohmann::json &j, const PathSynthConfig &d)
{
    PathSynthConfig c = d;
    c.n_reflections = j.value("n_reflections", c.n_reflections);
    c.min_excess_delay = j.value("min_excess_delay", c.min_excess_delay);
    c.mean_excess_delay = j.value("mean_excess_delay", c.mean_excess_delay);
    c.decay_constant = j.value("decay_constant", c.decay_constant);
    c.first_reflection_rel_db = j.value("first_reflection_rel_db", c.first_reflection_rel_db);
    c.nlos_excess_loss_db = j.value("nlos_excess_loss_db", c.nlos_excess_loss_db);
    c.nlos_onset_min = j.value("nlos_onset_min", c.nlos_onset_min);
    c.nlos_onset_max = j.value("nlos_onset_max", c.nlos_onset_max);
    c.antenna_gain_db = j.value("antenna_gain_db", c.antenna_gain_db);
    if (c.min_excess_delay < 0.0 || c.mean_excess_delay <= 0.0 || c.decay_constant <= 0.0 ||
        c.nlos_onset_min < 0.0 || c.nlos_onset_max < c.nlos_onset_min)
        throw ConfigError("invalid path synthesis delays");
    return c;
}

double free_space_amplitude(double distance, double wavelength)
{
    return wavelength / (4.0 * pi * distance);
}

MultipathSet synth_paths(const Scenario &scenario, std::size_t snapshot, std::size_t receiver, std::uint64_t seed,
                         const PathSynthConfig &cfg)
{
    const Vec3 &ap = scenario.ap_trajectory.at(snapshot).position;
    const Vec3 &ue = scenario.ues.at(receiver).position;
    const LinkVisibility vis = assess_link(scenario, ap, ue);

    MultipathSet set;
    set.snapshot = snapshot;
    set.receiver = receiver;
    set.geometry = {snapshot, receiver, link_distance(ap, ue), vis.state, vis.foliage_obstructed};

    std::mt19937_64 rng(derive_seed(seed, snapshot, receiver, 1));
    std::uniform_real_distribution<double> uniform_phase(0.0, 2.0 * pi);

    const double d = set.geometry.distance;
    const double los_delay = d / speed_of_light;
    const double a_fs = free_space_amplitude(d, scenario.wavelength()) * std::pow(10.0, cfg.antenna_gain_db / 20.0);

    double first_delay = los_delay;
    double first_power = 0.0;
    if (vis.state == LosState::los)
    {
        const double a = a_fs * std::pow(10.0, -vis.foliage_loss_db / 20.0);
        set.paths.push_back({los_delay, cplx{a, 0.0}, vis.foliage_obstructed ? PathType::foliage : PathType::direct});
        first_power = a * a;
    }
    else
    {
        // soft onset: the earliest NLOS arrival lags the geometric delay
        std::uniform_real_distribution<double> onset(cfg.nlos_onset_min, cfg.nlos_onset_max);
        first_delay = los_delay + std::max(onset(rng), 1e-12);
        const double a = a_fs * std::pow(10.0, -cfg.nlos_excess_loss_db / 20.0);
        set.paths.push_back({first_delay, std::polar(a, uniform_phase(rng)), PathType::diffraction});
        first_power = a * a;
    }

    std::exponential_distribution<double> excess(1.0 / cfg.mean_excess_delay);
    const double tail_level = first_power * from_db(cfg.first_reflection_rel_db);
    for (std::size_t i = 0; i < cfg.n_reflections; ++i)
    {
        const double dt = cfg.min_excess_delay + excess(rng);
        const double power = tail_level * std::exp(-dt / cfg.decay_constant);
        set.paths.push_back({first_delay + dt, std::polar(std::sqrt(power), uniform_phase(rng)), PathType::reflection});
    }
    std::stable_sort(set.paths.begin(), set.paths.end(),
                     [](const PropagationPath &a, const PropagationPath &b) { return a.delay < b.delay; });
    return set;
}

std::vector<cplx> transfer_function(std::span<const PropagationPath> paths, const WaveformSpec &spec)
{
    std::vector<cplx> H(spec.n_subcarriers, cplx{0.0, 0.0});
    for (std::size_t k = 0; k < spec.n_subcarriers; ++k)
    {
        const double f = spec.subcarrier_frequency(k);
        cplx acc{0.0, 0.0};
        for (const auto &p : paths)
            acc += p.amplitude * delay_phasor(f, p.delay);
        H[k] = acc;
    }
    return H;
}

TransferFunctionSnapshot paths_to_transfer_function(const MultipathSet &paths, const WaveformSpec &spec)
{
    if (paths.paths.empty())
        throw std::invalid_argument("empty multipath set");
    TransferFunctionSnapshot snap;
    snap.snapshot = paths.snapshot;
    snap.receiver = paths.receiver;
    snap.subcarrier_spacing = spec.subcarrier_spacing;
    snap.n_active = spec.n_subcarriers;
    snap.H = transfer_function(paths.paths, spec);
    return snap;
}

// ---------- Impairments ----------

void ImpairmentConfig::validate() const
{
    if (noise.floor_std_db < 0.0)
        throw ConfigError("noise floor std must be >= 0");
    if (clock_drift.step_std_m < 0.0)
        throw ConfigError("drift random-walk step std must be >= 0");
    if (!(clock_drift.decorrelation_distance > 0.0))
        throw ConfigError("drift decorrelation distance must be > 0");
    if (precursor.enabled && !(precursor.box_distance > 0.0))
        throw ConfigError("precursor box distance must be > 0");
}

nlohmann::json impairment_config_to_json(const ImpairmentConfig &c)
{
    return {{"noise",
             {{"enabled", c.noise.enabled},
              {"floor_db", c.noise.floor_db},
              {"floor_std_db", c.noise.floor_std_db},
              {"segment_snapshots", c.noise.segment_snapshots}}},
            {"clock_drift",
             {{"enabled", c.clock_drift.enabled},
              {"linear_rate", c.clock_drift.linear_rate},
              {"step_std_m", c.clock_drift.step_std_m},
              {"decorrelation_distance", c.clock_drift.decorrelation_distance}}},
            {"precursor",
             {{"enabled", c.precursor.enabled},
              {"box_distance", c.precursor.box_distance},
              {"relative_power_db", c.precursor.relative_power_db}}}};
}

ImpairmentConfig impairment_config_from_json(const nlohmann::json &j, const ImpairmentConfig &d)
{
    ImpairmentConfig c = d;
    if (j.contains("noise"))
    {
        const auto &n = j["noise"];
        c.noise.enabled = n.value("enabled", c.noise.enabled);
        c.noise.floor_db = n.value("floor_db", c.noise.floor_db);
        c.noise.floor_std_db = n.value("floor_std_db", c.noise.floor_std_db);
        c.noise.segment_snapshots = n.value("segment_snapshots", c.noise.segment_snapshots);
    }
    if (j.contains("clock_drift"))
    {
        const auto &n = j["clock_drift"];
        c.clock_drift.enabled = n.value("enabled", c.clock_drift.enabled);
        c.clock_drift.linear_rate = n.value("linear_rate", c.clock_drift.linear_rate);
        c.clock_drift.step_std_m = n.value("step_std_m", c.clock_drift.step_std_m);
        c.clock_drift.decorrelation_distance = n.value("decorrelation_distance", c.clock_drift.decorrelation_distance);
    }
    if (j.contains("precursor"))
    {
        const auto &n = j["precursor"];
        c.precursor.enabled = n.value("enabled", c.precursor.enabled);
        c.precursor.box_distance = n.value("box_distance", c.precursor.box_distance);
        c.precursor.relative_power_db = n.value("relative_power_db", c.precursor.relative_power_db);
    }
    c.validate();
    return c;
}

std::vector<double> gauss_markov_field(std::span<const double> coordinate, double decorrelation_distance,
                                       std::mt19937_64 &rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> x(coordinate.size());
    for (std::size_t i = 0; i < coordinate.size(); ++i)
    {
        const double e = normal(rng);
        if (i == 0)
        {
            x[i] = e;
            continue;
        }
        const double rho = std::exp(-std::abs(coordinate[i] - coordinate[i - 1]) / decorrelation_distance);
        x[i] = rho * x[i - 1] + std::sqrt(std::max(0.0, 1.0 - rho * rho)) * e;
    }
    return x;
}

DriftSeries generate_drift(const ClockDriftConfig &cfg, std::span<const TrajectorySample> trajectory,
                           std::uint64_t seed)
{
    const std::size_t n = trajectory.size();
    DriftSeries d;
    d.offset_m.assign(n, 0.0);
    d.linear_m.assign(n, 0.0);
    d.deviation_m.assign(n, 0.0);
    if (!cfg.enabled || n == 0)
        return d;

    std::mt19937_64 rng(derive_seed(seed, 0, 0, 2));
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto s = track_distance(trajectory);
    for (std::size_t m = 0; m < n; ++m)
    {
        d.linear_m[m] = speed_of_light * cfg.linear_rate * (trajectory[m].time - trajectory[0].time);
        if (m > 0)
        {
            const double rho = std::exp(-(s[m] - s[m - 1]) / cfg.decorrelation_distance);
            d.deviation_m[m] = rho * d.deviation_m[m - 1] + cfg.step_std_m * normal(rng);
        }
        d.offset_m[m] = d.linear_m[m] + d.deviation_m[m];
    }
    return d;
}

std::vector<double> noise_floor_series(const NoiseConfig &cfg, std::size_t n_snapshots, std::uint64_t seed)
{
    std::vector<double> floors(n_snapshots, cfg.floor_db);
    if (cfg.floor_std_db <= 0.0)
        return floors;
    std::mt19937_64 rng(derive_seed(seed, 0, 0, 3));
    std::normal_distribution<double> normal(0.0, cfg.floor_std_db);
    const std::size_t seg = cfg.segment_snapshots == 0 ? std::max<std::size_t>(n_snapshots, 1) : cfg.segment_snapshots;
    double current = cfg.floor_db;
    for (std::size_t m = 0; m < n_snapshots; ++m)
    {
        if (m % seg == 0)
            current = cfg.floor_db + normal(rng);
        floors[m] = current;
    }
    return floors;
}

void add_precursor(std::span<cplx> H, const WaveformSpec &spec, const PrecursorConfig &cfg)
{
    const double wavelength = speed_of_light / spec.center_frequency;
    const double a = free_space_amplitude(cfg.box_distance, wavelength) * std::pow(10.0, cfg.relative_power_db / 20.0);
    const double tau = cfg.box_distance / speed_of_light;
    for (std::size_t k = 0; k < H.size(); ++k)
        H[k] += a * delay_phasor(spec.subcarrier_frequency(k), tau);
}

void apply_delay_offset(std::span<cplx> H, const WaveformSpec &spec, double offset_m)
{
    const double tau = offset_m / speed_of_light;
    for (std::size_t k = 0; k < H.size(); ++k)
    {
        const double f = static_cast<double>(spec.baseband_offset(k)) * spec.subcarrier_spacing;
        H[k] *= std::polar(1.0, -2.0 * pi * f * tau);
    }
}

void add_white_noise(std::span<cplx> H, double variance, std::mt19937_64 &rng)
{
    std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
    for (auto &h : H)
    {
        const double re = normal(rng);
        const double im = normal(rng);
        h += cplx{re, im};
    }
}

TransferFunctionSnapshot inject_impairments(const TransferFunctionSnapshot &H, const WaveformSpec &spec,
                                            const ImpairmentConfig &cfg, const ImpairmentContext &ctx,
                                            std::uint64_t seed)
{
    if (H.H.size() != spec.n_subcarriers)
        throw std::invalid_argument("transfer function length does not match the waveform");
    TransferFunctionSnapshot out = H;
    if (cfg.precursor.enabled)
        add_precursor(out.H, spec, cfg.precursor);
    if (cfg.clock_drift.enabled && ctx.drift_offset_m != 0.0)
        apply_delay_offset(out.H, spec, ctx.drift_offset_m);
    if (cfg.noise.enabled)
    {
        std::mt19937_64 rng(derive_seed(seed, H.snapshot, H.receiver, 4));
        add_white_noise(out.H, from_db(ctx.noise_floor_db), rng);
    }
    return out;
}

// ---------- Statistical channel generator ----------

std::vector<std::string> StatChannelParams::validate() const
{
    std::vector<std::string> warnings;
    for (const auto *p : {&los, &nlos})
    {
        const char *name = p == &los ? "LOS" : "NLOS";
        if (p->sigma_s_db < 0.0 || p->ds_sigma_dbs < 0.0)
            throw ConfigError(std::string(name) + ": spreads must be >= 0");
        if (p->alpha < 1.0 || p->alpha > 6.0)
            warnings.push_back(std::string(name) + ": pathloss exponent " + std::to_string(p->alpha) +
                               " outside [1, 6]");
    }
    if (!(shadowing_decorrelation > 0.0))
        throw ConfigError("shadowing decorrelation distance must be > 0");
    return warnings;
}

std::vector<StatLink> generate_stat_channels(const StatChannelParams &params, const Scenario &scenario,
                                             std::uint64_t seed)
{
    params.validate();
    const auto s = track_distance(scenario.ap_trajectory);
    std::vector<StatLink> links;
    links.reserve(scenario.ues.size() * scenario.ap_trajectory.size());
    for (std::size_t u = 0; u < scenario.ues.size(); ++u)
    {
        std::mt19937_64 field_rng(derive_seed(seed, u, 0, 5));
        const auto field = gauss_markov_field(s, params.shadowing_decorrelation, field_rng);
        std::mt19937_64 ds_rng(derive_seed(seed, u, 0, 6));
        std::normal_distribution<double> normal(0.0, 1.0);
        for (std::size_t m = 0; m < scenario.ap_trajectory.size(); ++m)
        {
            const auto geo = link_geometry(scenario, m, u);
            const auto &p = geo.los == LosState::los ? params.los : params.nlos;
            StatLink link;
            link.ue = u;
            link.ap_sample = m;
            link.distance = geo.distance;
            link.los = geo.los;
            link.shadowing_db = p.sigma_s_db * field[m];
            link.pathloss_db = p.alpha * 10.0 * std::log10(geo.distance) + p.beta_db + link.shadowing_db;
            link.path_gain_db = -link.pathloss_db;
            link.delay_spread = std::pow(10.0, (p.ds_mu_dbs + p.ds_sigma_dbs * normal(ds_rng)) / 10.0);
            link.outside_validity = geo.distance < p.validity_min || geo.distance > p.validity_max;
            links.push_back(link);
        }
    }
    return links;
}

} // namespace chansound
