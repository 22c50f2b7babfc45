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

#include "rismimo.hpp"
#include "rismimo/oracle/oracles.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>

using namespace rismimo;

namespace
{

int run_oracle(const std::string &name, std::uint64_t seed)
{
    rng_t rng = make_stream(seed, {0xA11});
    ScenarioConfig c = desk_preset();
    const cmat H = build_coupling_matrix(build_geometry(c), c);

    if (name == "lmmse")
    {
        c.n_active = 4;
        c.n_ris = 8;
        c.ue_count = 3;
        c.pilot_length = 2;
        c.ris_mode = RisMode::active;
        c.power_split = 0.2;
        const cmat Hs = build_coupling_matrix(build_geometry(c), c);
        const TrainingBasis b = build_training_basis(Hs, make_training_configs(c, rng), c.svd_energy_fraction);
        const PilotBook p = make_pilot_book(c.pilot_length, c.ue_count, c.uplink_pilot_power);
        const rvec beta = rvec::LinSpaced(c.ue_count, 1e-9, 4e-9);
        const TrainingNoise n = TrainingNoise::from(c);
        const LmmseEstimator est(b, p, beta, n);
        std::printf("retained S=%d of rank %d\n", b.retained, b.rank);
        for (int k = 0; k < c.ue_count; ++k)
        {
            const cmat ref = oracle::lmmse_filter(k, b, p, beta, n);
            std::printf("ue %d  |W - W_ref|/|W_ref| = %.3e\n", k, (est.filter(k) - ref).norm() / ref.norm());
        }
        return 0;
    }
    if (name == "passive-exhaustive")
    {
        c.n_ris = 4;
        c.n_active = 2;
        c.ue_count = 2;
        c.sector_width = pi;
        const cmat Hs = build_coupling_matrix(build_geometry(c), c);
        std::vector<cvec> h{complex_normal_vector(rng, 4), complex_normal_vector(rng, 4)};
        const auto ex = oracle::exhaustive_passive(Hs, h, 16);
        PassiveOptions opt;
        opt.grid_size = 16;
        const auto res = optimize_passive(CostContext(Hs, h), RisConfig::passive(random_phases(rng, 4)), opt);
        std::printf("exhaustive optimum %.9g over %ld configurations\n", ex.best_cost, ex.evaluated);
        std::printf("alternating result %.9g (ratio %.6f, %d sweeps)\n", res.cost_trace.back(),
                    res.cost_trace.back() / ex.best_cost, res.iterations);
        return 0;
    }
    if (name == "active-random-search")
    {
        c.n_ris = 3;
        c.n_active = 2;
        c.sector_width = pi;
        const cmat Hs = build_coupling_matrix(build_geometry(c), c);
        std::vector<cvec> h{complex_normal_vector(rng, 3), complex_normal_vector(rng, 3)};
        const double best = oracle::random_search_active(Hs, h, 100000, rng);
        cvec init = random_phases(rng, 3) / std::sqrt(3.0);
        const auto res = optimize_active_direction(CostContext(Hs, h), init);
        std::printf("random search best %.9g, projected gradient %.9g\n", best, res.cost_trace.back());
        return 0;
    }
    if (name == "gradient-fd")
    {
        std::vector<cvec> h;
        for (int k = 0; k < c.ue_count; ++k)
            h.push_back(complex_normal_vector(rng, c.n_ris));
        const CostContext ctx(H, h);
        const cvec p = complex_normal_vector(rng, c.n_ris).normalized();
        const cvec g = active_gradient(p, ctx);
        auto f = [&](const cvec &x) { return cross_corr_cost(x, ctx); };
        for (int i = 0; i < 5; ++i)
        {
            const cvec d = complex_normal_vector(rng, c.n_ris).normalized();
            const double fd = oracle::directional_derivative(f, p, d, 1e-6);
            const double an = (g.adjoint() * d)(0).real();
            std::printf("direction %d  analytic %.9e  central difference %.9e\n", i, an, fd);
        }
        return 0;
    }
    if (name == "power-grid")
    {
        SinrCoefficients s;
        s.a = rvec::Random(2).cwiseAbs() + rvec::Constant(2, 0.1);
        s.b = rmat::Random(2, 2).cwiseAbs() * 0.2;
        s.b.diagonal().setZero();
        s.c = rvec::Zero(2);
        s.noise = rvec::Constant(2, 0.05);
        s.precoder_norms = rvec::Ones(2);
        s.budget = 1.0;
        const auto pa = maxmin_bisection(s);
        const auto g = oracle::grid_maxmin_2ue(s, 10000);
        std::printf("bisection t* %.9g, grid %.9g\n", pa.t_star, g.best_min_sinr);
        return 0;
    }
    if (name == "rmt-identity")
    {
        const cmat X = complex_normal_matrix(rng, 6, 6);
        const cmat R = X * X.adjoint() / 6.0;
        const cmat A = complex_normal_matrix(rng, 6, 6);
        const double mc = oracle::quadratic_form_second_moment(R, A, 200000, rng);
        const double cf = std::norm((R * A).trace()) + (R * A * R * A.adjoint()).trace().real();
        std::printf("Monte Carlo %.6g, closed form %.6g\n", mc, cf);
        return 0;
    }
    if (name == "fp-legacy")
    {
        const cmat I = cmat::Identity(16, 16);
        const auto rep = fp_hardening_mc(I, cvec::Ones(16), 2, 100000, rng);
        std::printf("closed form %.9g, Monte Carlo f_11 %.6g f_12 %.6g\n", rep.closed_form_value, rep.f_self(0),
                    rep.f_cross(0, 1));
        return 0;
    }
    std::cerr << "unknown oracle '" << name
              << "'; available: lmmse passive-exhaustive active-random-search gradient-fd power-grid rmt-identity "
                 "fp-legacy\n";
    return 2;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"rismimo: RIS-aided massive MIMO link-level simulator"};
    app.require_subcommand(1);

    std::string scenario_path, experiment = "cdf_compare", out_dir = "out", manifest_path;
    int drops = 50, fading = 16;
    unsigned threads = 0;
    std::uint64_t seed = 1;
    std::vector<double> sweep;

    auto *run = app.add_subcommand("run", "run a campaign and write CSV tables");
    run->add_option("--scenario", scenario_path, "scenario JSON file (defaults to the desk preset)");
    run->add_option("--experiment", experiment, "cdf_compare | epsilon_sweep | quantization_sweep | "
                                                "ris_policy_compare | legacy_mimo_baseline");
    auto *drops_opt = run->add_option("--drops", drops, "number of drops")->check(CLI::PositiveNumber);
    auto *fading_opt = run->add_option("--fading", fading, "fading realizations per drop")->check(CLI::Range(2, 1 << 20));
    auto *seed_opt = run->add_option("--seed", seed, "base seed")->envname("RISMIMO_SEED");
    run->add_option("--sweep", sweep, "sweep values (eps, phase bits with 0 = continuous, or antenna counts), space or comma separated")
        ->delimiter(',');
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--threads", threads, "worker threads, 0 = hardware concurrency");
    run->add_option("--manifest", manifest_path, "rerun the campaign recorded in a manifest.json");

    auto *val = app.add_subcommand("validate", "check a scenario file");
    val->add_option("--scenario", scenario_path, "scenario JSON file")->required();

    std::string oracle_name;
    auto *orc = app.add_subcommand("oracle", "run a brute-force reference check and print its fixture");
    orc->add_option("name", oracle_name, "oracle name")->required();
    orc->add_option("--seed", seed, "seed")->envname("RISMIMO_SEED");

    std::string preset_name;
    auto *pre = app.add_subcommand("preset", "print a built-in scenario as JSON");
    pre->add_option("name", preset_name, "desk | full")->required();

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*run)
        {
            Campaign c;
            if (!manifest_path.empty())
            {
                std::ifstream f(manifest_path);
                if (!f)
                    throw io_error("cannot read manifest '" + manifest_path + "'");
                c = campaign_from_manifest(nlohmann::json::parse(f));
                if (*drops_opt)
                    c.n_drops = drops;
                if (*fading_opt)
                    c.n_fading = fading;
                if (*seed_opt)
                    c.scenario.rng_seed = seed;
            }
            else
            {
                c.scenario = scenario_path.empty() ? desk_preset() : load_scenario(scenario_path);
                c.experiment = experiment_from_string(experiment);
                c.n_drops = drops;
                c.n_fading = fading;
                c.sweep_values = sweep;
                if (*seed_opt)
                    c.scenario.rng_seed = seed;
            }
            c.output_dir = out_dir;
            c.threads = threads;
            const auto t0 = std::chrono::steady_clock::now();
            const CampaignResult res = run_campaign(c);
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            for (const auto &v : res.variants)
                std::printf("%-12s median SE  pcsi %.4f  lb %.4f  ub %.4f  | mean min SE  pcsi %.4f  lb %.4f\n",
                            v.variant.label.c_str(), v.pcsi.median(), v.lb.median(), v.ub.median(),
                            mean_min_se(v.drops, "pcsi"), mean_min_se(v.drops, "lb"));
            std::printf("wrote %zu files to %s in %.1f s\n", res.files.size() + 1, out_dir.c_str(), secs);
            return 0;
        }
        if (*val)
        {
            const ScenarioConfig c = load_scenario(scenario_path);
            const SystemGeometry g = build_geometry(c);
            std::printf("ok: N_A=%d N_R=%d K=%d, d_A=%.6g m, D=%.6g m, Q=%d, prelog=%.4f\n", c.n_active, c.n_ris,
                        c.ue_count, g.active_spacing, g.array_ris_distance, c.training_epochs(), c.prelog_value());
            return 0;
        }
        if (*orc)
            return run_oracle(oracle_name, seed);
        if (*pre)
        {
            if (preset_name == "desk")
                std::cout << to_json(desk_preset().resolved()).dump(2) << "\n";
            else if (preset_name == "full")
                std::cout << to_json(full_scale_preset().resolved()).dump(2) << "\n";
            else
                throw invalid_config("unknown preset '" + preset_name + "'");
            return 0;
        }
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
