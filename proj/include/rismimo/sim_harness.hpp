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

#ifndef RISMIMO_SIM_HARNESS_HPP
#define RISMIMO_SIM_HARNESS_HPP

#include "rismimo/channel_estimation.hpp"
#include "rismimo/config.hpp"
#include "rismimo/core.hpp"
#include "rismimo/geometry_channel.hpp"
#include "rismimo/power_control.hpp"
#include "rismimo/ris_optimizer.hpp"
#include "rismimo/spectral_efficiency.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace rismimo
{

enum class Architecture
{
    ris,
    legacy // H = P = I with N_A antennas
};

enum class Experiment
{
    cdf_compare,
    epsilon_sweep,
    quantization_sweep,
    ris_policy_compare,
    legacy_mimo_baseline
};

inline std::string to_string(Experiment e)
{
    switch (e)
    {
    case Experiment::cdf_compare: return "cdf_compare";
    case Experiment::epsilon_sweep: return "epsilon_sweep";
    case Experiment::quantization_sweep: return "quantization_sweep";
    case Experiment::ris_policy_compare: return "ris_policy_compare";
    case Experiment::legacy_mimo_baseline: return "legacy_mimo_baseline";
    }
    return "?";
}

inline Experiment experiment_from_string(const std::string &s)
{
    for (Experiment e : {Experiment::cdf_compare, Experiment::epsilon_sweep, Experiment::quantization_sweep,
                         Experiment::ris_policy_compare, Experiment::legacy_mimo_baseline})
        if (to_string(e) == s)
            return e;
    throw invalid_config("unknown experiment '" + s + "'");
}

// rng stream tags; fixed so that variants sharing a seed see the same users and fading
namespace stream
{
constexpr std::uint64_t placement = 1;
constexpr std::uint64_t training_configs = 2;
constexpr std::uint64_t fading = 3;
constexpr std::uint64_t training_noise = 4;
constexpr std::uint64_t ris_init = 5;
constexpr std::uint64_t ris_fixed = 6;
} // namespace stream

struct DropResult
{
    int drop = 0;
    rvec beta;
    rmat se_pcsi;     // n_fading x K
    rvec se_lb;       // K
    rvec se_ub;       // K
    rvec se_ub_error; // K, Monte Carlo standard error of se_ub
    rvec sinr_lb;     // K
    rvec eta_lb;      // K
    double prelog = 1.0;
    double omega_ris = 1.0; // last realization (fixed for the random policy)

    double min_se_lb() const { return se_lb.minCoeff(); }
    double min_se_pcsi() const { return se_pcsi.rowwise().minCoeff().mean(); }
};

namespace detail
{
inline std::vector<cvec> scale_channels(const rvec &beta, const std::vector<cvec> &g)
{
    std::vector<cvec> h;
    for (std::size_t k = 0; k < g.size(); ++k)
        h.push_back(std::sqrt(beta(Eigen::Index(k))) * g[k]);
    return h;
}
} // namespace detail

/// One drop: users, training, then n_fading realizations of fading. Perfect-CSI
/// SE designs RIS and precoders on the true channels; the hardening bounds use
/// LMMSE estimates for both. Deterministic in (seed, drop).
inline DropResult run_drop(const ScenarioConfig &config, Architecture arch, int n_fading, std::uint64_t seed,
                           int drop)
{
    if (n_fading < 2)
        throw invalid_config("run_drop: need at least two fading realizations per drop");
    validate(config);
    const int K = config.ue_count;
    const std::uint64_t d = std::uint64_t(drop);
    const bool legacy = arch == Architecture::legacy;

    DropResult out;
    out.drop = drop;

    cmat H;
    if (legacy)
        H = cmat::Identity(config.n_active, config.n_active);
    else
        H = build_coupling_matrix(build_geometry(config), config);
    const Eigen::Index nr = H.cols();

    rng_t place_rng = make_stream(seed, {d, stream::placement});
    out.beta = large_scale_gains(place_users(config, place_rng), config, place_rng);

    // training
    std::vector<cvec> configs;
    if (legacy)
        configs.push_back(cvec::Ones(nr));
    else
    {
        rng_t cfg_rng = make_stream(seed, {d, stream::training_configs});
        configs = make_training_configs(config, cfg_rng);
    }
    const TrainingBasis basis = build_training_basis(H, configs, config.svd_energy_fraction, !legacy);
    const PilotBook pilots = make_pilot_book(config.pilot_length, K, config.uplink_pilot_power);
    TrainingNoise tnoise = TrainingNoise::from(config);
    DownlinkNoise dnoise = DownlinkNoise::from(config);
    double budget = (1.0 - config.power_split) * config.power_budget;
    if (legacy)
    {
        tnoise.delta = 0;
        dnoise.delta = 0;
        budget = config.power_budget;
    }
    const LmmseEstimator estimator(basis, pilots, out.beta, tnoise);
    out.prelog = config.prelog_value(int(configs.size()));

    std::optional<RisConfig> fixed;
    if (legacy)
        fixed = RisConfig::identity(nr);
    else if (config.ris_policy == RisPolicy::random)
    {
        rng_t r = make_stream(seed, {d, stream::ris_fixed});
        fixed = design_ris(CostContext(H, {}), config, r).config;
    }

    auto configure = [&](const std::vector<cvec> &info, std::uint64_t real) {
        if (fixed)
            return *fixed;
        rng_t r = make_stream(seed, {d, stream::ris_init, real});
        return design_ris(CostContext(H, info), config, r).config;
    };

    out.se_pcsi.resize(n_fading, K);
    HardeningAccumulator acc(K);
    std::vector<cmat> ub_gains;
    std::vector<rvec> ub_zeta;
    for (int t = 0; t < n_fading; ++t)
    {
        const std::uint64_t real = std::uint64_t(t);
        rng_t fade_rng = make_stream(seed, {d, stream::fading, real});
        std::vector<cvec> g;
        for (int k = 0; k < K; ++k)
            g.push_back(complex_normal_vector(fade_rng, nr));
        const std::vector<cvec> h = detail::scale_channels(out.beta, g);

        rng_t noise_rng = make_stream(seed, {d, stream::training_noise, real});
        const std::vector<cvec> hhat =
            estimator.estimate_all(simulate_training(h, basis, pilots, tnoise, noise_rng)).estimates;

        // perfect CSI
        {
            const RisConfig P = configure(h, real);
            const cvec pd = P.diagonal();
            const Precoders w = make_precoders(H, pd, h, true);
            const SinrCoefficients s = extract_coefficients_pcsi(H, pd, h, w, dnoise, budget);
            const PowerAllocation pa = maxmin_bisection(s);
            out.se_pcsi.row(t) = se_from_sinr(pa.sinr, out.prelog).transpose();
        }

        // estimated CSI
        {
            const RisConfig P = configure(hhat, real);
            out.omega_ris = P.omega_ris;
            const cvec pd = P.diagonal();
            const Precoders w = make_precoders(H, pd, hhat, true);
            const cmat G = downlink_gains(H, pd, h, w.W);
            const rvec zeta = double(dnoise.delta) * dnoise.ris_noise * ris_noise_gains(pd, h);
            acc.add(G, zeta, w.norms_sq());
            ub_gains.push_back(G);
            ub_zeta.push_back(zeta);
        }
    }

    const HardeningTerms terms = acc.terms();
    const PowerAllocation pa = maxmin_bisection(extract_coefficients_lb(terms, dnoise, budget));
    out.eta_lb = pa.eta;
    out.sinr_lb = pa.sinr;
    out.se_lb = se_from_sinr(pa.sinr, out.prelog);

    // upper bound: receivers know their own estimated-CSI gains, same powers
    SeAverager ub;
    for (std::size_t t = 0; t < ub_gains.size(); ++t)
    {
        const cmat &G = ub_gains[t];
        rvec g(K);
        for (int k = 0; k < K; ++k)
        {
            double interference = 0.0;
            for (int j = 0; j < K; ++j)
                if (j != k)
                    interference += pa.eta(j) * std::norm(G(k, j));
            g(k) = pa.eta(k) * std::norm(G(k, k)) / (interference + ub_zeta[t](k) + dnoise.ue_noise(k));
        }
        ub.add(g);
    }
    const SEReport ub_report = ub.report(out.prelog);
    out.se_ub = ub_report.se;
    out.se_ub_error = ub_report.std_error;
    return out;
}

/// Runs drops 0..n_drops-1 on `threads` workers. Results are indexed by drop, so
/// the output does not depend on the thread count.
inline std::vector<DropResult> run_drops(const ScenarioConfig &config, Architecture arch, int n_drops, int n_fading,
                                         std::uint64_t seed, unsigned threads = 0)
{
    if (n_drops < 1)
        throw invalid_config("need at least one drop");
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, unsigned(n_drops));

    std::vector<DropResult> results(n_drops);
    std::atomic<int> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    int error_drop = -1;
    std::string error_msg;

    auto worker = [&]() {
        for (;;)
        {
            const int d = next.fetch_add(1);
            if (d >= n_drops)
                return;
            try
            {
                results[d] = run_drop(config, arch, n_fading, seed, d);
            }
            catch (const std::exception &e)
            {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (error_drop < 0 || d < error_drop)
                {
                    error_drop = d;
                    error_msg = e.what();
                }
            }
        }
    };

    if (threads == 1)
        worker();
    else
    {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < threads; ++i)
            pool.emplace_back(worker);
        for (auto &t : pool)
            t.join();
    }
    if (error_drop >= 0)
        throw error("drop " + std::to_string(error_drop) + ": " + error_msg);
    return results;
}

// ------------------------------------------------------------------------
// CDF tables and CSV

struct CdfTable
{
    std::string label;
    std::string metric; // "pcsi", "lb" or "ub"
    rvec se;            // ascending
    rvec cdf;           // i / n

    double median() const
    {
        const Eigen::Index n = se.size();
        return n % 2 ? se(n / 2) : 0.5 * (se(n / 2 - 1) + se(n / 2));
    }
};

inline CdfTable make_cdf(std::vector<double> samples, std::string label, std::string metric)
{
    if (samples.empty())
        throw invalid_config("make_cdf: no samples");
    std::sort(samples.begin(), samples.end());
    CdfTable t;
    t.label = std::move(label);
    t.metric = std::move(metric);
    const Eigen::Index n = Eigen::Index(samples.size());
    t.se = Eigen::Map<rvec>(samples.data(), n);
    t.cdf.resize(n);
    for (Eigen::Index i = 0; i < n; ++i)
        t.cdf(i) = double(i + 1) / double(n);
    return t;
}

inline std::vector<double> collect_samples(const std::vector<DropResult> &drops, const std::string &metric)
{
    std::vector<double> v;
    for (const auto &d : drops)
    {
        if (metric == "pcsi")
            for (Eigen::Index i = 0; i < d.se_pcsi.size(); ++i)
                v.push_back(d.se_pcsi.reshaped<Eigen::RowMajor>()(i));
        else
        {
            const rvec &x = metric == "lb" ? d.se_lb : d.se_ub;
            v.insert(v.end(), x.data(), x.data() + x.size());
        }
    }
    return v;
}

inline double mean_min_se(const std::vector<DropResult> &drops, const std::string &metric)
{
    double s = 0.0;
    for (const auto &d : drops)
        s += metric == "pcsi" ? d.min_se_pcsi() : d.min_se_lb();
    return s / double(drops.size());
}

inline std::string format_number(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

inline void write_text(const std::filesystem::path &path, const std::string &text)
{
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw io_error("cannot open '" + path.string() + "' for writing");
    f << text;
    f.close();
    if (!f)
        throw io_error("write to '" + path.string() + "' failed");
}

inline std::string cdf_csv(const CdfTable &t)
{
    std::string s = "se_bps_hz,cdf\n";
    for (Eigen::Index i = 0; i < t.se.size(); ++i)
        s += format_number(t.se(i)) + "," + format_number(t.cdf(i)) + "\n";
    return s;
}

// ------------------------------------------------------------------------
// Campaigns

struct Campaign
{
    ScenarioConfig scenario;
    Experiment experiment = Experiment::cdf_compare;
    int n_drops = 50;
    int n_fading = 16;
    std::vector<double> sweep_values; // eps for epsilon_sweep, N_Q (0 = continuous) for quantization_sweep,
                                      // legacy antenna counts for legacy_mimo_baseline, eps of the active
                                      // variant for cdf_compare
    std::string output_dir = "out";
    unsigned threads = 0;
};

inline std::vector<double> default_sweep(Experiment e, const ScenarioConfig &c)
{
    switch (e)
    {
    case Experiment::epsilon_sweep: return {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    case Experiment::quantization_sweep: return {3, 4, 0};
    case Experiment::legacy_mimo_baseline: return {double(c.n_active)};
    case Experiment::cdf_compare: return {c.power_split > 0.0 ? c.power_split : 0.2};
    case Experiment::ris_policy_compare: return {};
    }
    return {};
}

struct Variant
{
    std::string label;
    ScenarioConfig config;
    Architecture arch = Architecture::ris;
    double sweep_value = 0.0;
};

inline std::string sweep_label(double v)
{
    std::string s = format_number(v);
    std::replace(s.begin(), s.end(), '.', 'p');
    return s;
}

inline std::vector<Variant> campaign_variants(const Campaign &c)
{
    const std::vector<double> sweep = c.sweep_values.empty() ? default_sweep(c.experiment, c.scenario) : c.sweep_values;
    std::vector<Variant> v;
    ScenarioConfig base = c.scenario;
    switch (c.experiment)
    {
    case Experiment::cdf_compare: {
        ScenarioConfig passive = base;
        passive.ris_mode = RisMode::passive;
        passive.power_split = 0.0;
        ScenarioConfig active = base;
        active.ris_mode = RisMode::active;
        active.power_split = sweep.at(0);
        v.push_back({"active", active, Architecture::ris, sweep.at(0)});
        v.push_back({"passive", passive, Architecture::ris, 0.0});
        v.push_back({"legacy", passive, Architecture::legacy, double(base.n_active)});
        break;
    }
    case Experiment::epsilon_sweep:
        for (double e : sweep)
        {
            ScenarioConfig a = base;
            a.ris_mode = RisMode::active;
            a.power_split = e;
            v.push_back({"eps" + sweep_label(e), a, Architecture::ris, e});
        }
        break;
    case Experiment::quantization_sweep:
        for (double q : sweep)
        {
            ScenarioConfig a = base;
            if (q > 0)
                a.phase_bits = int(q);
            else
                a.phase_bits.reset();
            v.push_back({q > 0 ? "nq" + sweep_label(q) : "nqcont", a, Architecture::ris, q});
        }
        break;
    case Experiment::ris_policy_compare: {
        ScenarioConfig o = base, r = base;
        o.ris_policy = RisPolicy::optimized;
        r.ris_policy = RisPolicy::random;
        v.push_back({"optimized", o, Architecture::ris, 0.0});
        v.push_back({"random", r, Architecture::ris, 0.0});
        break;
    }
    case Experiment::legacy_mimo_baseline:
        for (double n : sweep)
        {
            ScenarioConfig l = base;
            l.n_active = int(n);
            l.ris_mode = RisMode::passive;
            l.power_split = 0.0;
            v.push_back({"legacy" + sweep_label(n), l, Architecture::legacy, n});
        }
        break;
    }
    for (auto &x : v)
        validate(x.config);
    return v;
}

struct VariantResult
{
    Variant variant;
    std::vector<DropResult> drops;
    CdfTable pcsi, lb, ub;
};

struct CampaignResult
{
    std::vector<VariantResult> variants;
    std::vector<std::string> files; // relative to output_dir
};

inline nlohmann::json campaign_manifest(const Campaign &c)
{
    nlohmann::json j;
    j["tool"] = "rismimo";
    j["format"] = 1;
    j["experiment"] = to_string(c.experiment);
    j["drops"] = c.n_drops;
    j["fading_per_drop"] = c.n_fading;
    j["seed"] = c.scenario.rng_seed;
    j["sweep"] = c.sweep_values.empty() ? default_sweep(c.experiment, c.scenario) : c.sweep_values;
    j["scenario"] = to_json(c.scenario);
    return j;
}

inline Campaign campaign_from_manifest(const nlohmann::json &j)
{
    Campaign c;
    c.scenario = from_json(j.at("scenario"));
    c.experiment = experiment_from_string(j.at("experiment").get<std::string>());
    c.n_drops = j.at("drops").get<int>();
    c.n_fading = j.at("fading_per_drop").get<int>();
    c.scenario.rng_seed = j.at("seed").get<std::uint64_t>();
    c.sweep_values = j.at("sweep").get<std::vector<double>>();
    return c;
}

/// Runs every variant, writes CDF files, summary tables and manifest.json. An
/// empty output_dir skips writing.
inline CampaignResult run_campaign(const Campaign &c)
{
    if (c.n_drops < 1)
        throw invalid_config("campaign: n_drops must be >= 1");
    CampaignResult res;
    for (const Variant &v : campaign_variants(c))
    {
        VariantResult r;
        r.variant = v;
        r.drops = run_drops(v.config, v.arch, c.n_drops, c.n_fading, c.scenario.rng_seed, c.threads);
        r.pcsi = make_cdf(collect_samples(r.drops, "pcsi"), v.label, "pcsi");
        r.lb = make_cdf(collect_samples(r.drops, "lb"), v.label, "lb");
        r.ub = make_cdf(collect_samples(r.drops, "ub"), v.label, "ub");
        res.variants.push_back(std::move(r));
    }

    if (c.output_dir.empty())
        return res;
    namespace fs = std::filesystem;
    const fs::path dir(c.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw io_error("cannot create output directory '" + dir.string() + "': " + ec.message());

    auto emit = [&](const std::string &name, const std::string &text) {
        write_text(dir / name, text);
        res.files.push_back(name);
    };

    for (const auto &r : res.variants)
        for (const CdfTable *t : {&r.pcsi, &r.lb, &r.ub})
            emit("cdf_" + r.variant.label + "_" + t->metric + ".csv", cdf_csv(*t));

    if (c.experiment == Experiment::epsilon_sweep)
        for (const std::string m : {"pcsi", "lb"})
        {
            std::string s = "epsilon,min_se_bps_hz\n";
            for (const auto &r : res.variants)
                s += format_number(r.variant.sweep_value) + "," + format_number(mean_min_se(r.drops, m)) + "\n";
            emit("epsilon_sweep_" + m + ".csv", s);
        }
    if (c.experiment == Experiment::quantization_sweep)
    {
        std::string s = "phase_bits,median_se_pcsi_bps_hz,median_se_lb_bps_hz\n";
        for (const auto &r : res.variants)
            s += (r.variant.sweep_value > 0 ? format_number(r.variant.sweep_value) : std::string("continuous")) + "," +
                 format_number(r.pcsi.median()) + "," + format_number(r.lb.median()) + "\n";
        emit("quantization_summary.csv", s);
    }
    if (c.experiment == Experiment::ris_policy_compare)
    {
        std::string s = "drop,min_se_optimized_bps_hz,min_se_random_bps_hz\n";
        for (int d = 0; d < c.n_drops; ++d)
            s += std::to_string(d) + "," + format_number(res.variants[0].drops[d].min_se_lb()) + "," +
                 format_number(res.variants[1].drops[d].min_se_lb()) + "\n";
        emit("policy_min_se_lb.csv", s);
    }

    nlohmann::json m = campaign_manifest(c);
    m["outputs"] = res.files;
    write_text(dir / "manifest.json", m.dump(2) + "\n");
    return res;
}

} // namespace rismimo

#endif
