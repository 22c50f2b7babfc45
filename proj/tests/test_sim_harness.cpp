// SPDX-License-Identifier: Apache-2.0
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace rismimo;
using namespace testutil;
namespace fs = std::filesystem;

namespace
{
std::string slurp(const fs::path &p)
{
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

fs::path scratch(const std::string &name)
{
    const fs::path p = fs::temp_directory_path() / ("rismimo_test_" + name);
    fs::remove_all(p);
    return p;
}

void expect_same_tree(const fs::path &a, const fs::path &b)
{
    int n = 0;
    for (const auto &e : fs::directory_iterator(a))
    {
        const fs::path other = b / e.path().filename();
        ASSERT_TRUE(fs::exists(other)) << other;
        EXPECT_EQ(slurp(e.path()), slurp(other)) << e.path().filename();
        ++n;
    }
    EXPECT_GT(n, 0);
}

ScenarioConfig small_desk()
{
    ScenarioConfig c = desk_preset();
    c.ue_count = 3;
    return c;
}
} // namespace

TEST(Drop, DeterministicAndShaped)
{
    const ScenarioConfig c = small_desk();
    const DropResult a = run_drop(c, Architecture::ris, 3, 7, 2);
    const DropResult b = run_drop(c, Architecture::ris, 3, 7, 2);
    EXPECT_EQ(a.se_pcsi.rows(), 3);
    EXPECT_EQ(a.se_pcsi.cols(), 3);
    EXPECT_EQ((a.se_pcsi - b.se_pcsi).norm(), 0.0);
    EXPECT_EQ((a.se_lb - b.se_lb).norm(), 0.0);
    EXPECT_DOUBLE_EQ(a.prelog, (200.0 - 4 * 8) / 200.0);
    EXPECT_THROW(run_drop(c, Architecture::ris, 1, 7, 0), invalid_config);
}

TEST(Drop, BoundOrdering)
{
    ScenarioConfig c = small_desk();
    for (RisMode m : {RisMode::passive, RisMode::active})
    {
        c.ris_mode = m;
        c.power_split = m == RisMode::active ? 0.2 : 0.0;
        for (int d = 0; d < 3; ++d)
        {
            const DropResult r = run_drop(c, Architecture::ris, 16, 3, d);
            for (int k = 0; k < c.ue_count; ++k)
                EXPECT_LE(r.se_lb(k), r.se_ub(k) + r.se_ub_error(k)) << to_string(m) << " drop " << d << " ue " << k;
        }
    }
}

TEST(Drop, UpperBoundStandardErrorBelowOnePercent)
{
    // desk scenario, 1e3 realizations; measured 1.4-2.4% relative, see README
    const ScenarioConfig c = desk_preset();
    const DropResult r = run_drop(c, Architecture::ris, 1000, 1, 0);
    std::printf("UB relative standard errors:");
    for (int k = 0; k < c.ue_count; ++k)
        std::printf(" %.4f", r.se_ub_error(k) / r.se_ub(k));
    std::printf("\n");
    for (int k = 0; k < c.ue_count; ++k)
        EXPECT_LT(r.se_ub_error(k), 0.01 * r.se_ub(k)) << k;
}

TEST(Drop, LegacyMatchesDirectFormula)
{
    // H = P = I: perfect-CSI SINR is the plain MIMO expression with maximum-ratio
    // precoding; recompute it by hand from the same fading draws
    const ScenarioConfig c = small_desk();
    const std::uint64_t seed = 9;
    const DropResult r = run_drop(c, Architecture::legacy, 4, seed, 1);
    EXPECT_DOUBLE_EQ(r.prelog, (200.0 - 8) / 200.0);
    const int K = c.ue_count, N = c.n_active;
    for (int t = 0; t < 4; ++t)
    {
        rng_t fr = make_stream(seed, {1, stream::fading, std::uint64_t(t)});
        std::vector<cvec> h;
        for (int k = 0; k < K; ++k)
            h.push_back(std::sqrt(r.beta(k)) * complex_normal_vector(fr, N));
        rmat G(K, K);
        for (int k = 0; k < K; ++k)
            for (int j = 0; j < K; ++j)
                G(k, j) = std::norm(h[k].dot(h[j])) / h[j].squaredNorm(); // |h_k^T conj(h_j)|^2 / |h_j|^2
        // balanced SINR from the achieved powers
        SinrCoefficients s;
        s.a = G.diagonal();
        s.b = G.transpose();
        s.b.diagonal().setZero();
        s.c = rvec::Zero(K);
        s.noise = rvec::Constant(K, c.noise_power());
        s.precoder_norms = rvec::Ones(K);
        s.budget = c.power_budget;
        const double t_star = maxmin_bisection(s).t_star;
        EXPECT_NEAR(r.se_pcsi.row(t).minCoeff(), r.prelog * std::log2(1 + t_star), 1e-6);
    }
}

TEST(Drop, EpsZeroActiveEqualsPassive)
{
    ScenarioConfig p = small_desk();
    ScenarioConfig a = p;
    a.ris_mode = RisMode::active;
    a.power_split = 0.0;
    for (int d = 0; d < 2; ++d)
    {
        const DropResult rp = run_drop(p, Architecture::ris, 3, 4, d);
        const DropResult ra = run_drop(a, Architecture::ris, 3, 4, d);
        EXPECT_LT((rp.se_pcsi - ra.se_pcsi).cwiseAbs().maxCoeff(), 1e-9);
        EXPECT_LT((rp.se_lb - ra.se_lb).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(Drops, ThreadCountIndependent)
{
    const ScenarioConfig c = small_desk();
    const auto a = run_drops(c, Architecture::ris, 4, 2, 3, 1);
    const auto b = run_drops(c, Architecture::ris, 4, 2, 3, 3);
    for (int d = 0; d < 4; ++d)
    {
        EXPECT_EQ((a[d].se_pcsi - b[d].se_pcsi).norm(), 0.0);
        EXPECT_EQ((a[d].se_lb - b[d].se_lb).norm(), 0.0);
    }
}

TEST(Drops, ErrorsCarryDropIndex)
{
    const ScenarioConfig c = small_desk();
    try
    {
        run_drops(c, Architecture::ris, 2, 1, 1, 1); // one realization is rejected
        FAIL() << "expected an error";
    }
    catch (const error &e)
    {
        EXPECT_EQ(std::string(e.what()).rfind("drop 0:", 0), 0u) << e.what();
    }
}

TEST(Cdf, MonotoneAndCounted)
{
    const ScenarioConfig c = small_desk();
    const auto drops = run_drops(c, Architecture::ris, 3, 2, 5, 1);
    const CdfTable t = make_cdf(collect_samples(drops, "pcsi"), "x", "pcsi");
    EXPECT_EQ(t.se.size(), 3 * 3 * 2);
    EXPECT_EQ(collect_samples(drops, "lb").size(), 9u);
    for (Eigen::Index i = 1; i < t.se.size(); ++i)
    {
        EXPECT_GE(t.se(i), t.se(i - 1));
        EXPECT_GT(t.cdf(i), t.cdf(i - 1));
    }
    EXPECT_DOUBLE_EQ(t.cdf(0), 1.0 / 18);
    EXPECT_DOUBLE_EQ(t.cdf(17), 1.0);
    EXPECT_THROW(make_cdf({}, "x", "lb"), invalid_config);
}

TEST(Campaign, ByteIdenticalAcrossRunsAndThreads)
{
    const fs::path a = scratch("a"), b = scratch("b");
    Campaign c;
    c.scenario = small_desk();
    c.n_drops = 3;
    c.n_fading = 2;
    c.threads = 1;
    c.output_dir = a.string();
    run_campaign(c);
    c.output_dir = b.string();
    c.threads = 3;
    run_campaign(c);
    expect_same_tree(a, b);
    EXPECT_EQ(slurp(a / "cdf_passive_lb.csv").substr(0, 14), "se_bps_hz,cdf\n");
}

TEST(Campaign, ManifestRerunReproduces)
{
    const fs::path a = scratch("m1"), b = scratch("m2");
    Campaign c;
    c.scenario = small_desk();
    c.experiment = Experiment::ris_policy_compare;
    c.n_drops = 2;
    c.n_fading = 2;
    c.output_dir = a.string();
    run_campaign(c);
    Campaign again = campaign_from_manifest(nlohmann::json::parse(slurp(a / "manifest.json")));
    again.output_dir = b.string();
    run_campaign(again);
    expect_same_tree(a, b);
    EXPECT_TRUE(fs::exists(a / "policy_min_se_lb.csv"));
}

TEST(Campaign, EpsilonSweepRows)
{
    const fs::path a = scratch("eps");
    Campaign c;
    c.scenario = small_desk();
    c.scenario.ue_count = 2;
    c.experiment = Experiment::epsilon_sweep;
    c.n_drops = 1;
    c.n_fading = 2;
    c.output_dir = a.string();
    const CampaignResult r = run_campaign(c);
    EXPECT_EQ(r.variants.size(), 10u);
    std::istringstream in(slurp(a / "epsilon_sweep_lb.csv"));
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "epsilon,min_se_bps_hz");
    int rows = 0;
    while (std::getline(in, line))
        ++rows;
    EXPECT_EQ(rows, 10);
    // the eps = 0 row is the passive RIS
    Campaign p = c;
    p.experiment = Experiment::cdf_compare;
    p.output_dir.clear();
    const CampaignResult rp = run_campaign(p);
    EXPECT_NEAR(mean_min_se(r.variants[0].drops, "lb"), mean_min_se(rp.variants[1].drops, "lb"), 1e-9);
}

TEST(Campaign, UnwritableOutput)
{
    const fs::path f = scratch("file");
    write_text(f, "x");
    Campaign c;
    c.scenario = small_desk();
    c.n_drops = 1;
    c.n_fading = 2;
    c.output_dir = (f / "sub").string();
    EXPECT_THROW(run_campaign(c), io_error);
}

TEST(Campaign, VariantsAndValidation)
{
    Campaign c;
    c.scenario = small_desk();
    c.experiment = Experiment::quantization_sweep;
    const auto v = campaign_variants(c);
    ASSERT_EQ(v.size(), 3u);
    EXPECT_EQ(v[0].label, "nq3");
    EXPECT_EQ(v[2].label, "nqcont");
    c.experiment = Experiment::epsilon_sweep;
    c.sweep_values = {1.2};
    EXPECT_THROW(campaign_variants(c), invalid_config);
    EXPECT_THROW(experiment_from_string("nope"), invalid_config);
    c.n_drops = 0;
    EXPECT_THROW(run_campaign(c), invalid_config);
}

TEST(Campaign, DeskRuntimeBudget)
{
    // 50 drops of the desk scenario, all three architectures
    Campaign c;
    c.scenario = desk_preset();
    c.n_drops = 50;
    c.n_fading = 8;
    c.output_dir.clear();
    const auto t0 = std::chrono::steady_clock::now();
    run_campaign(c);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("desk cdf_compare, 50 drops x 8 realizations: %.1f s\n", secs);
    EXPECT_LT(secs, 300.0);
}
