// SPDX-License-Identifier: Apache-2.0
//
// rismimo - link-level simulation of RIS-aided antenna arrays
// Copyright (C) 2026 The rismimo authors
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

#ifndef RISMIMO_CONFIG_HPP
#define RISMIMO_CONFIG_HPP

#include "rismimo/core.hpp"

#include <json.hpp>

#include <fstream>
#include <optional>
#include <sstream>
#include <string>

namespace rismimo
{

enum class RisMode
{
    passive,
    active
};

enum class RisPolicy
{
    optimized,
    random
};

inline std::string to_string(RisMode m) { return m == RisMode::passive ? "passive" : "active"; }
inline std::string to_string(RisPolicy p) { return p == RisPolicy::optimized ? "optimized" : "random"; }

/// Full description of one simulated scenario. Units: Hz, meters, radians, watts, dB as named.
struct ScenarioConfig
{
    // radio
    double carrier_frequency = 1.9e9;  // Hz
    double bandwidth = 20e6;           // Hz
    double noise_figure_db = 5.0;      // receiver noise figure at array and UEs
    double ris_noise_figure_db = 5.0;  // noise figure of the active-RIS amplifiers
    double noise_psd_dbm_hz = -174.0;  // thermal noise spectral density

    // antenna structure
    int n_active = 8;                      // N_A
    int n_ris = 32;                        // N_R
    double sector_width = pi / 5.0;        // alpha, radiation sector of the active elements
    std::optional<double> array_ris_distance; // D in meters; default 5 wavelengths
    std::optional<double> ris_element_spacing; // d_R in meters; default half wavelength
    double ris_efficiency = 1.0;           // rho
    double ris_gain = 2.0;                 // G_R, linear (3 dB)
    double ris_height = 10.0;              // meters

    // users
    int ue_count = 4;                       // K
    double ue_sector_half_width = pi / 3.0; // UEs lie in [-w, w] around the RIS boresight
    double ue_min_distance = 10.0;          // horizontal distance range, meters
    double ue_max_distance = 400.0;
    double ue_height = 1.5;
    bool shadowing = false;
    double shadowing_std_db = 7.82;

    // uplink training
    int pilot_length = 8;                   // tau_p
    double uplink_pilot_power = 0.4;        // watts, same for every UE
    double svd_energy_fraction = 0.98;
    double active_training_gain = 2.0;      // extra reflected power of an active RIS during training

    // downlink
    double power_budget = 12.0;             // P_B, watts
    double power_split = 0.0;               // epsilon, fraction of P_B spent at the RIS
    RisMode ris_mode = RisMode::passive;
    RisPolicy ris_policy = RisPolicy::optimized;
    int coherence_symbols = 200;            // tau_c
    std::optional<double> prelog;           // overrides (tau_c - Q tau_p) / tau_c
    std::optional<int> phase_bits;          // N_Q; empty means continuous phases

    // RIS optimizer knobs
    int passive_grid_size = 256;
    int passive_max_sweeps = 100;
    int active_max_iters = 2000;
    double optimizer_tol = 1e-6;

    std::uint64_t rng_seed = 1;

    double wavelength() const { return speed_of_light / carrier_frequency; }
    double distance_D() const { return array_ris_distance.value_or(5.0 * wavelength()); }
    double spacing_dR() const { return ris_element_spacing.value_or(0.5 * wavelength()); }

    /// delta: 1 when the RIS injects amplifier noise. An active RIS with no power share
    /// does not amplify and behaves as a passive one.
    bool amplifies() const { return ris_mode == RisMode::active && power_split > 0.0; }
    int delta() const { return amplifies() ? 1 : 0; }

    /// Thermal noise power at the array and at each UE (N0 B F), watts.
    double noise_power() const
    {
        return dbm_to_watt(noise_psd_dbm_hz + linear_to_db(bandwidth) + noise_figure_db);
    }
    /// Amplifier noise power per active-RIS element, watts.
    double ris_noise_power() const
    {
        return dbm_to_watt(noise_psd_dbm_hz + linear_to_db(bandwidth) + ris_noise_figure_db);
    }

    int training_epochs() const { return (n_ris + n_active - 1) / n_active; }

    double prelog_value(int epochs) const
    {
        if (prelog)
            return *prelog;
        return double(coherence_symbols - epochs * pilot_length) / double(coherence_symbols);
    }
    double prelog_value() const { return prelog_value(training_epochs()); }

    /// Copy with frequency-dependent defaults made explicit.
    ScenarioConfig resolved() const
    {
        ScenarioConfig r = *this;
        r.array_ris_distance = distance_D();
        r.ris_element_spacing = spacing_dR();
        return r;
    }

    bool operator==(const ScenarioConfig &) const = default;
};

inline void validate(const ScenarioConfig &c)
{
    auto fail = [](const std::string &msg) { throw invalid_config(msg); };
    if (c.carrier_frequency <= 0.0 || c.bandwidth <= 0.0)
        fail("carrier frequency and bandwidth must be positive");
    if (c.n_active < 1)
        fail("n_active must be >= 1");
    if (c.n_ris < c.n_active)
        fail("n_ris must be >= n_active");
    if (c.ue_count < 1)
        fail("ue_count must be >= 1");
    if (c.pilot_length < 1)
        fail("pilot_length must be >= 1");
    if (!(c.sector_width > 0.0 && c.sector_width <= pi))
        fail("sector_width must lie in (0, pi]");
    if (!(c.ris_efficiency > 0.0 && c.ris_efficiency <= 1.0))
        fail("ris_efficiency must lie in (0, 1]");
    if (!(c.svd_energy_fraction > 0.0 && c.svd_energy_fraction <= 1.0))
        fail("svd_energy_fraction must lie in (0, 1]");
    if (!(c.power_split >= 0.0 && c.power_split < 1.0))
        fail("power_split must lie in [0, 1)");
    if (c.ris_mode == RisMode::passive && c.power_split != 0.0)
        fail("power_split must be 0 for a passive RIS");
    if (c.power_budget <= 0.0 || c.uplink_pilot_power <= 0.0)
        fail("powers must be positive");
    if (c.distance_D() <= 0.0 || c.spacing_dR() <= 0.0)
        fail("array-RIS distance and RIS spacing must be positive");
    if (!(c.ue_min_distance > 0.0 && c.ue_max_distance >= c.ue_min_distance))
        fail("UE distance range must satisfy 0 < min <= max");
    if (c.coherence_symbols < 1)
        fail("coherence_symbols must be >= 1");
    const double xi = c.prelog_value();
    if (!(xi > 0.0 && xi <= 1.0))
        fail("prelog must lie in (0, 1]; increase coherence_symbols or set prelog");
    if (c.phase_bits && *c.phase_bits < 1)
        fail("phase_bits must be >= 1");
    if (c.passive_grid_size < 2 || c.passive_max_sweeps < 1 || c.active_max_iters < 1 || c.optimizer_tol < 0.0)
        fail("invalid optimizer settings");
}

// ------------------------------------------------------------------------
// Structured text form (JSON, nested sections). Every field is written, including
// resolved defaults, so a written file reproduces the config exactly.

inline nlohmann::json to_json(const ScenarioConfig &c)
{
    using nlohmann::json;
    json j;
    j["radio"] = {{"carrier_frequency_hz", c.carrier_frequency},
                  {"bandwidth_hz", c.bandwidth},
                  {"noise_figure_db", c.noise_figure_db},
                  {"ris_noise_figure_db", c.ris_noise_figure_db},
                  {"noise_psd_dbm_hz", c.noise_psd_dbm_hz}};
    j["array"] = {{"n_active", c.n_active},
                  {"n_ris", c.n_ris},
                  {"sector_width_rad", c.sector_width},
                  {"array_ris_distance_m", c.distance_D()},
                  {"ris_element_spacing_m", c.spacing_dR()},
                  {"ris_efficiency", c.ris_efficiency},
                  {"ris_gain", c.ris_gain},
                  {"ris_height_m", c.ris_height}};
    j["users"] = {{"count", c.ue_count},
                  {"sector_half_width_rad", c.ue_sector_half_width},
                  {"min_distance_m", c.ue_min_distance},
                  {"max_distance_m", c.ue_max_distance},
                  {"height_m", c.ue_height},
                  {"shadowing", c.shadowing},
                  {"shadowing_std_db", c.shadowing_std_db}};
    j["training"] = {{"pilot_length", c.pilot_length},
                     {"uplink_pilot_power_w", c.uplink_pilot_power},
                     {"svd_energy_fraction", c.svd_energy_fraction},
                     {"active_training_gain", c.active_training_gain}};
    j["downlink"] = {{"power_budget_w", c.power_budget},
                     {"power_split", c.power_split},
                     {"ris_mode", to_string(c.ris_mode)},
                     {"ris_policy", to_string(c.ris_policy)},
                     {"coherence_symbols", c.coherence_symbols},
                     {"phase_bits", c.phase_bits ? json(*c.phase_bits) : json("continuous")}};
    if (c.prelog)
        j["downlink"]["prelog"] = *c.prelog;
    j["optimizer"] = {{"passive_grid_size", c.passive_grid_size},
                      {"passive_max_sweeps", c.passive_max_sweeps},
                      {"active_max_iters", c.active_max_iters},
                      {"tolerance", c.optimizer_tol}};
    j["rng_seed"] = c.rng_seed;
    return j;
}

namespace detail
{
template <typename T>
void read_opt(const nlohmann::json &sec, const char *key, T &out)
{
    if (sec.contains(key))
        out = sec.at(key).get<T>();
}
} // namespace detail

/// Missing keys keep their defaults; unknown sections are ignored.
inline ScenarioConfig from_json(const nlohmann::json &j)
{
    using detail::read_opt;
    ScenarioConfig c;
    try
    {
        if (j.contains("radio"))
        {
            const auto &s = j.at("radio");
            read_opt(s, "carrier_frequency_hz", c.carrier_frequency);
            read_opt(s, "bandwidth_hz", c.bandwidth);
            read_opt(s, "noise_figure_db", c.noise_figure_db);
            read_opt(s, "ris_noise_figure_db", c.ris_noise_figure_db);
            read_opt(s, "noise_psd_dbm_hz", c.noise_psd_dbm_hz);
        }
        if (j.contains("array"))
        {
            const auto &s = j.at("array");
            read_opt(s, "n_active", c.n_active);
            read_opt(s, "n_ris", c.n_ris);
            read_opt(s, "sector_width_rad", c.sector_width);
            if (s.contains("array_ris_distance_m"))
                c.array_ris_distance = s.at("array_ris_distance_m").get<double>();
            if (s.contains("array_ris_distance_wavelengths"))
                c.array_ris_distance = s.at("array_ris_distance_wavelengths").get<double>() * c.wavelength();
            if (s.contains("ris_element_spacing_m"))
                c.ris_element_spacing = s.at("ris_element_spacing_m").get<double>();
            read_opt(s, "ris_efficiency", c.ris_efficiency);
            read_opt(s, "ris_gain", c.ris_gain);
            read_opt(s, "ris_height_m", c.ris_height);
        }
        if (j.contains("users"))
        {
            const auto &s = j.at("users");
            read_opt(s, "count", c.ue_count);
            read_opt(s, "sector_half_width_rad", c.ue_sector_half_width);
            read_opt(s, "min_distance_m", c.ue_min_distance);
            read_opt(s, "max_distance_m", c.ue_max_distance);
            read_opt(s, "height_m", c.ue_height);
            read_opt(s, "shadowing", c.shadowing);
            read_opt(s, "shadowing_std_db", c.shadowing_std_db);
        }
        if (j.contains("training"))
        {
            const auto &s = j.at("training");
            read_opt(s, "pilot_length", c.pilot_length);
            read_opt(s, "uplink_pilot_power_w", c.uplink_pilot_power);
            read_opt(s, "svd_energy_fraction", c.svd_energy_fraction);
            read_opt(s, "active_training_gain", c.active_training_gain);
        }
        if (j.contains("downlink"))
        {
            const auto &s = j.at("downlink");
            read_opt(s, "power_budget_w", c.power_budget);
            read_opt(s, "power_split", c.power_split);
            read_opt(s, "coherence_symbols", c.coherence_symbols);
            if (s.contains("prelog"))
                c.prelog = s.at("prelog").get<double>();
            if (s.contains("ris_mode"))
            {
                const auto m = s.at("ris_mode").get<std::string>();
                if (m == "passive")
                    c.ris_mode = RisMode::passive;
                else if (m == "active")
                    c.ris_mode = RisMode::active;
                else
                    throw invalid_config("unknown ris_mode '" + m + "'");
            }
            if (s.contains("ris_policy"))
            {
                const auto p = s.at("ris_policy").get<std::string>();
                if (p == "optimized")
                    c.ris_policy = RisPolicy::optimized;
                else if (p == "random")
                    c.ris_policy = RisPolicy::random;
                else
                    throw invalid_config("unknown ris_policy '" + p + "'");
            }
            if (s.contains("phase_bits"))
            {
                const auto &pb = s.at("phase_bits");
                if (pb.is_string())
                {
                    if (pb.get<std::string>() != "continuous")
                        throw invalid_config("phase_bits must be an integer or \"continuous\"");
                    c.phase_bits.reset();
                }
                else
                    c.phase_bits = pb.get<int>();
            }
        }
        if (j.contains("optimizer"))
        {
            const auto &s = j.at("optimizer");
            read_opt(s, "passive_grid_size", c.passive_grid_size);
            read_opt(s, "passive_max_sweeps", c.passive_max_sweeps);
            read_opt(s, "active_max_iters", c.active_max_iters);
            read_opt(s, "tolerance", c.optimizer_tol);
        }
        read_opt(j, "rng_seed", c.rng_seed);
    }
    catch (const nlohmann::json::exception &e)
    {
        throw invalid_config(std::string("malformed scenario: ") + e.what());
    }
    return c;
}

inline ScenarioConfig load_scenario(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw io_error("cannot open scenario file '" + path + "'");
    nlohmann::json j;
    try
    {
        in >> j;
    }
    catch (const nlohmann::json::exception &e)
    {
        throw invalid_config("cannot parse '" + path + "': " + e.what());
    }
    auto c = from_json(j);
    validate(c);
    return c;
}

inline void save_scenario(const ScenarioConfig &c, const std::string &path)
{
    std::ofstream out(path);
    if (!out)
        throw io_error("cannot write scenario file '" + path + "'");
    out << to_json(c).dump(2) << '\n';
    if (!out)
        throw io_error("write failed for '" + path + "'");
}

/// Desk-scale defaults used by CI.
inline ScenarioConfig desk_preset() { return ScenarioConfig{}; }

/// 16 active antennas, 64 RIS elements, 8 users.
inline ScenarioConfig full_scale_preset()
{
    ScenarioConfig c;
    c.n_active = 16;
    c.n_ris = 64;
    c.ue_count = 8;
    return c;
}

} // namespace rismimo

#endif
