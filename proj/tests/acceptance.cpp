// SPDX-License-Identifier: Apache-2.0
//
// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "rismimo.hpp"
#include "rismimo/oracle/oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>

using namespace rismimo;
namespace fs = std::filesystem;

namespace
{
int failures = 0;

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(int id, bool ok, const std::string &what)
{
    std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", id, what.c_str());
    std::fflush(stdout);
    failures += ok ? 0 : 1;
}

std::string fmt(const char *f, ...)
{
    char buf[1024];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ------------------------------------------------------------------------

void criterion1()
{
    const auto t0 = std::chrono::steady_clock::now();
    const int N = 16;
    const cmat I = cmat::Identity(N, N);
    const double closed = fp_hardening_closed(I, cvec::Ones(N));
    rng_t r = make_stream(101);
    const FpHardeningReport rep = fp_hardening_mc(I, cvec::Ones(N), 2, 100000, r);
    const double worst = std::max({relative_error(rep.f_self(0), 1.0 / N), relative_error(rep.f_self(1), 1.0 / N),
                                   relative_error(rep.f_cross(0, 1), 1.0 / N)});
    const double secs = seconds_since(t0);
    report(1, closed == 1.0 / N && worst < 0.05 && secs < 10.0,
           fmt("legacy hardening closed=%.17g (1/16=%.17g), MC worst rel err %.4f at 1e5 trials, %.2f s", closed,
               1.0 / N, worst, secs));
}

void criterion2()
{
    rng_t r = make_stream(102);
    int violations = 0;
    double min_margin = std::numeric_limits<double>::infinity();
    for (int t = 0; t < 1000; ++t)
    {
        const int na = 1 + int(r() % 16);
        const int nr = na + int(r() % 48);
        const cmat H = complex_normal_matrix(r, na, nr);
        cvec p = t % 2 ? random_phases(r, nr) : complex_normal_vector(r, nr);
        const double f = fp_hardening_closed(H, p);
        min_margin = std::min(min_margin, f - 1.0 / na);
        violations += f < 1.0 / na - 1e-12;
    }
    report(2, violations == 0, fmt("1000 random (H, P): %d violations, smallest margin %.3g", violations, min_margin));
}

void criterion3()
{
    const auto t0 = std::chrono::steady_clock::now();
    ScenarioConfig c = desk_preset();
    c.ris_mode = RisMode::active;
    c.power_split = 0.2;
    const std::uint64_t seed = 103;
    const cmat H = build_coupling_matrix(build_geometry(c), c);
    rng_t pr = make_stream(seed, {1});
    const rvec beta = large_scale_gains(place_users(c, pr), c, pr);
    rng_t cr = make_stream(seed, {2});
    const TrainingBasis basis = build_training_basis(H, make_training_configs(c, cr), c.svd_energy_fraction);
    const PilotBook pilots = make_pilot_book(c.pilot_length, c.ue_count, c.uplink_pilot_power);
    const TrainingNoise tn = TrainingNoise::from(c);
    rng_t rr = make_stream(seed, {3});
    cvec dir = random_phases(rr, c.n_ris) / std::sqrt(double(c.n_ris));
    const double omega = ris_power_scale(dir, H, c.power_split, c.power_budget, c.ris_noise_power());
    const cvec pd = std::sqrt(omega) * dir;
    const DownlinkNoise dn = DownlinkNoise::from(c);

    HardeningSetup hs{H, pd, beta, basis, pilots, tn, c.ris_noise_power(), 1, false, false};
    rng_t mr = make_stream(seed, {4});
    const HardeningTerms mc = hardening_terms_mc(hs, 10000, mr);
    const int K = c.ue_count;
    const EstimateSet est = LmmseEstimator(basis, pilots, beta, tn)
                                .estimate_all(std::vector<cvec>(K, cvec::Zero(basis.stacked.rows())));
    const HardeningTerms cf = hardening_closed_form(H, pd, beta, est, c.ris_noise_power(), 1);

    double e_ds = 0, e_bu = 0, e_ui = 0, e_z = 0;
    for (int k = 0; k < K; ++k)
    {
        e_ds = std::max(e_ds, std::abs(mc.ds(k) - cf.ds(k)) / std::abs(cf.ds(k)));
        e_bu = std::max(e_bu, relative_error(mc.bu(k), cf.bu(k)));
        e_z = std::max(e_z, relative_error(mc.dyn_noise(k), cf.dyn_noise(k)));
        for (int j = 0; j < K; ++j)
            if (j != k)
                e_ui = std::max(e_ui, relative_error(mc.ui(k, j), cf.ui(k, j)));
    }
    const rvec eta = rvec::Constant(K, (1 - c.power_split) * c.power_budget / cf.precoder_norms.sum());
    const rvec g_mc = sinr_lower_bound(mc, eta, dn);
    const rvec g_cf = sinr_lower_bound_closed_form(H, pd, beta, est, eta, dn);
    double e_g = 0;
    for (int k = 0; k < K; ++k)
        e_g = std::max(e_g, relative_error(g_mc(k), g_cf(k)));
    const double secs = seconds_since(t0);
    const double worst = std::max({e_ds, e_bu, e_ui, e_z, e_g});
    report(3, worst < 0.03 && secs < 300.0,
           fmt("closed form vs 1e4-trial MC, max rel err DS %.4f BU %.4f UI %.4f noise %.4f SINR %.4f, %.1f s", e_ds,
               e_bu, e_ui, e_z, e_g, secs));
}

void criterion4()
{
    // small instance: N_A = 2, N_R = 4, Q = 2, three UEs on two pilots, amplifying RIS
    rng_t r = make_stream(104);
    const cmat H = complex_normal_matrix(r, 2, 4);
    const double a = std::sqrt(2.0);
    const TrainingBasis basis = build_training_basis(H, {a * random_phases(r, 4), a * random_phases(r, 4)}, 0.98);
    const PilotBook pilots = make_pilot_book(2, 3, 1.0);
    const rvec beta = (rvec(3) << 1.0, 0.6, 1.4).finished();
    const TrainingNoise tn{0.4, 0.2, 1};
    const LmmseEstimator est(basis, pilots, beta, tn);
    double filt_err = 0;
    for (int k = 0; k < 3; ++k)
    {
        const cmat ref = oracle::lmmse_filter(k, basis, pilots, beta, tn);
        filt_err = std::max(filt_err, (est.filter(k) - ref).cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff());
    }

    const int n = 10000;
    cmat cross = cmat::Zero(4, 4);
    double prop_err = 0;
    for (int t = 0; t < n; ++t)
    {
        std::vector<cvec> h;
        for (int k = 0; k < 3; ++k)
            h.push_back(std::sqrt(beta(k)) * complex_normal_vector(r, 4));
        const EstimateSet e = est.estimate_all(simulate_training(h, basis, pilots, tn, r));
        cross += e.estimates[0] * (h[0] - e.estimates[0]).adjoint();
        // UEs 0 and 2 share a pilot
        prop_err = std::max(prop_err, (e.estimates[0] - e.copilot_scale(0, 2) * e.estimates[2]).norm() /
                                          e.estimates[0].norm());
    }
    const double orth = (cross / double(n)).cwiseAbs().maxCoeff() / beta(0);
    report(4, filt_err < 1e-10 && orth < 0.05 && prop_err < 1e-12,
           fmt("LMMSE vs oracle rel err %.2e; max |E[hhat e^H]|/beta %.4f over 1e4 trials; co-pilot proportionality "
               "err %.2e",
               filt_err, orth, prop_err));
}

void criterion5()
{
    rng_t r = make_stream(105);
    auto monotone = [](const std::vector<double> &v) {
        for (std::size_t i = 1; i < v.size(); ++i)
            if (v[i] > v[i - 1])
                return false;
        return true;
    };
    int viol_p = 0, viol_a = 0;
    for (int t = 0; t < 100; ++t)
    {
        const int nr = 4 + int(r() % 28), na = 1 + int(r() % 8), K = 2 + int(r() % 5);
        const cmat H = complex_normal_matrix(r, na, nr);
        std::vector<cvec> h;
        for (int k = 0; k < K; ++k)
            h.push_back(complex_normal_vector(r, nr));
        const CostContext ctx(H, h);
        viol_p += !monotone(optimize_passive(ctx, RisConfig::passive(random_phases(r, nr))).cost_trace);
        viol_a += !monotone(optimize_active_direction(ctx, complex_normal_vector(r, nr)).cost_trace);
    }

    double grad_err = 0;
    for (int t = 0; t < 20; ++t)
    {
        const cmat H = complex_normal_matrix(r, 4, 10);
        std::vector<cvec> h;
        for (int k = 0; k < 4; ++k)
            h.push_back(complex_normal_vector(r, 10));
        const CostContext ctx(H, h);
        const cvec p = complex_normal_vector(r, 10), d = complex_normal_vector(r, 10);
        const double an = (active_gradient(p, ctx).adjoint() * d)(0).real();
        const double fd = oracle::directional_derivative([&](const cvec &x) { return cross_corr_cost(x, ctx); }, p, d,
                                                         1e-5);
        grad_err = std::max(grad_err, std::abs(an - fd) / std::abs(fd));
    }

    // tiny instance: N_R = 4, 16-point grid, K = 2
    int within = 0;
    double worst = 1.0, mean_ratio = 0.0, mean_gap = 0.0;
    const int n_tiny = 10;
    for (int t = 0; t < n_tiny; ++t)
    {
        const cmat H = complex_normal_matrix(r, 2, 4);
        const std::vector<cvec> h = {complex_normal_vector(r, 4), complex_normal_vector(r, 4)};
        const CostContext ctx(H, h);
        PassiveOptions opt;
        opt.grid_size = 16;
        const RisConfig start = RisConfig::passive(cvec::Ones(4));
        const double got = cross_corr_cost(optimize_passive(ctx, start, opt).config, ctx);
        const double best = oracle::exhaustive_passive(H, h, 16).best_cost;
        const double ratio = got / best;
        within += ratio <= 1.05;
        worst = std::max(worst, ratio);
        mean_ratio += ratio / n_tiny;
        mean_gap += (got - best) / (cross_corr_cost(start, ctx) - best) / n_tiny;
    }
    const bool ok = viol_p == 0 && viol_a == 0 && grad_err < 1e-5;
    report(5, ok,
           fmt("monotone traces: %d passive / %d active violations on 100 instances; gradient vs FD max rel err %.2e; "
               "tiny passive vs exhaustive: %d/%d within 5%%, cost ratio mean %.3g worst %.3g, remaining gap %.3g of the "
               "initial excess (gap reported)",
               viol_p, viol_a, grad_err, within, n_tiny, mean_ratio, worst, mean_gap));
}

void criterion6()
{
    rng_t r = make_stream(106);
    const double nu = 1e-4;
    double worst_grid = 0, worst_spread = 0, worst_budget = 0;
    for (int t = 0; t < 100; ++t)
    {
        SinrCoefficients s;
        s.a = (rvec(2) << std::exp(uniform(r, -2, 2)), std::exp(uniform(r, -2, 2))).finished();
        s.b.resize(2, 2);
        for (int i = 0; i < 4; ++i)
            s.b(i) = std::exp(uniform(r, -4, -1));
        s.c = (rvec(2) << uniform(r, 0, 0.2), uniform(r, 0, 0.2)).finished();
        s.delta = t % 2;
        s.noise = (rvec(2) << std::exp(uniform(r, -3, 0)), std::exp(uniform(r, -3, 0))).finished();
        s.precoder_norms = (rvec(2) << uniform(r, 0.5, 2), uniform(r, 0.5, 2)).finished();
        s.budget = uniform(r, 1, 10);
        const PowerAllocation pa = maxmin_bisection(s, nu);
        const double grid = oracle::grid_maxmin_2ue(s, 10000).best_min_sinr;
        worst_grid = std::max(worst_grid, relative_error(pa.t_star, grid));
        worst_spread = std::max(worst_spread, pa.sinr.maxCoeff() - pa.sinr.minCoeff());
        worst_budget = std::max(worst_budget, relative_error(transmit_power(s, pa.eta), s.budget));
    }
    report(6, worst_grid < 0.01 && worst_spread <= 2 * nu && worst_budget < 1e-9,
           fmt("K=2 bisection vs 1e4-point grid max rel diff %.2e; SINR spread %.2e (2nu = %.0e); budget rel err %.2e",
               worst_grid, worst_spread, 2 * nu, worst_budget));
}

void criterion7()
{
    ScenarioConfig c = desk_preset();
    const cmat H = build_coupling_matrix(build_geometry(c), c);
    rng_t r = make_stream(107);
    double worst = 0;
    for (int t = 0; t < 100; ++t)
    {
        const double eps = uniform(r, 0.01, 0.95);
        cvec d = complex_normal_vector(r, c.n_ris);
        d.normalize();
        const double omega = ris_power_scale(d, H, eps, c.power_budget, c.ris_noise_power());
        const double lhs =
            ris_power_constraint_lhs(std::sqrt(omega) * d, H, (1 - eps) * c.power_budget, c.ris_noise_power());
        worst = std::max(worst, relative_error(lhs, eps * c.power_budget));
    }

    ScenarioConfig a = c;
    a.ris_mode = RisMode::active;
    a.power_split = 0.0;
    double diff = 0;
    for (int d = 0; d < 5; ++d)
    {
        const DropResult rp = run_drop(c, Architecture::ris, 4, 107, d);
        const DropResult ra = run_drop(a, Architecture::ris, 4, 107, d);
        diff = std::max({diff, (rp.se_pcsi - ra.se_pcsi).cwiseAbs().maxCoeff(),
                         (rp.se_lb - ra.se_lb).cwiseAbs().maxCoeff(), (rp.se_ub - ra.se_ub).cwiseAbs().maxCoeff()});
    }
    report(7, worst < 1e-12 && diff < 1e-9,
           fmt("RIS power constraint rel err %.2e over 100 draws; eps=0 active vs passive max SE diff %.2e over 5 "
               "drops",
               worst, diff));
}

// ------------------------------------------------------------------------

struct DropCache
{
    int n_drops, n_fading;
    std::uint64_t seed;
    std::map<std::string, std::vector<DropResult>> runs;

    const std::vector<DropResult> &get(const std::string &key, const ScenarioConfig &c,
                                       Architecture arch = Architecture::ris)
    {
        auto it = runs.find(key);
        if (it != runs.end())
            return it->second;
        const auto t0 = std::chrono::steady_clock::now();
        auto res = run_drops(c, arch, n_drops, n_fading, seed, 0);
        std::printf("  ran %-22s %.1f s\n", key.c_str(), seconds_since(t0));
        std::fflush(stdout);
        return runs.emplace(key, std::move(res)).first->second;
    }
};

std::vector<double> min_se(const std::vector<DropResult> &d, bool pcsi)
{
    std::vector<double> v;
    for (const auto &x : d)
        v.push_back(pcsi ? x.min_se_pcsi() : x.min_se_lb());
    return v;
}

void criterion8()
{
    const auto t0 = std::chrono::steady_clock::now();
    DropCache cache{200, 10, 2024, {}};
    const ScenarioConfig passive = desk_preset();
    ScenarioConfig active = passive;
    active.ris_mode = RisMode::active;
    active.power_split = 0.2;
    auto with_policy = [](ScenarioConfig c) {
        c.ris_policy = RisPolicy::random;
        return c;
    };
    auto with_bits = [](ScenarioConfig c, int b) {
        c.phase_bits = b;
        return c;
    };

    // (a) optimized vs random RIS, per drop, hardening bound
    std::string a_msg;
    bool a_ok = true;
    for (const auto &[name, cfg] : {std::pair{std::string("passive"), passive}, std::pair{std::string("active"), active}})
    {
        const auto opt = min_se(cache.get(name, cfg), false);
        const auto rnd = min_se(cache.get(name + "_random", with_policy(cfg)), false);
        int wins = 0;
        for (std::size_t d = 0; d < opt.size(); ++d)
            wins += opt[d] > rnd[d];
        const double frac = double(wins) / double(opt.size());
        a_ok = a_ok && frac >= 0.95;
        a_msg += fmt("%s %.1f%% (mean %.3f vs %.3f); ", name.c_str(), 100 * frac,
                     std::accumulate(opt.begin(), opt.end(), 0.0) / opt.size(),
                     std::accumulate(rnd.begin(), rnd.end(), 0.0) / rnd.size());
    }

    // (b) median SE ordering active >= passive >= legacy
    const auto &act = cache.get("active", active);
    const auto &pas = cache.get("passive", passive);
    const auto &leg = cache.get("legacy", passive, Architecture::legacy);
    bool b_ok = true;
    std::string b_msg;
    for (const std::string m : {"pcsi", "lb"})
    {
        const double ma = median(collect_samples(act, m)), mp = median(collect_samples(pas, m)),
                     ml = median(collect_samples(leg, m));
        b_ok = b_ok && ma >= mp && mp >= ml;
        b_msg += fmt("%s %.3f/%.3f/%.3f; ", m.c_str(), ma, mp, ml);
    }

    // (c) min-SE vs eps flat over [0.1, 0.7]
    double lo = std::numeric_limits<double>::infinity(), hi = 0;
    std::string c_msg;
    for (int i = 1; i <= 7; ++i)
    {
        ScenarioConfig e = active;
        e.power_split = 0.1 * i;
        const std::string key = i == 2 ? "active" : "eps" + std::to_string(i);
        const auto v = min_se(cache.get(key, e), false);
        const double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
        lo = std::min(lo, m);
        hi = std::max(hi, m);
        c_msg += fmt("%.3f ", m);
    }
    const bool c_ok = hi / lo < 1.5;

    // (d) quantization, perfect-CSI median SE
    bool d_ok = true;
    std::string d_msg;
    for (const auto &[name, cfg] : {std::pair{std::string("passive"), passive}, std::pair{std::string("active"), active}})
    {
        const double mc = median(collect_samples(cache.get(name, cfg), "pcsi"));
        const double m4 = median(collect_samples(cache.get(name + "_nq4", with_bits(cfg, 4)), "pcsi"));
        const double m3 = median(collect_samples(cache.get(name + "_nq3", with_bits(cfg, 3)), "pcsi"));
        const bool ok = std::abs(m4 - mc) <= 0.1 * mc && std::abs(m3 - mc) > std::abs(m4 - mc);
        d_ok = d_ok && ok;
        d_msg += fmt("%s cont %.4f nq4 %.4f nq3 %.4f; ", name.c_str(), mc, m4, m3);
    }

    const double secs = seconds_since(t0);
    report(8, a_ok && b_ok && c_ok && d_ok && secs < 1800.0,
           fmt("200 drops x 10 realizations, %.0f s total", secs));
    std::printf("  (a) %s optimized beats random in >= 95%% of drops (LB min-SE): %s\n", a_ok ? "ok  " : "FAIL",
                a_msg.c_str());
    std::printf("  (b) %s median active>=passive>=legacy: %s\n", b_ok ? "ok  " : "FAIL", b_msg.c_str());
    std::printf("  (c) %s LB min-SE eps=0.1..0.7: %s max/min %.3f\n", c_ok ? "ok  " : "FAIL", c_msg.c_str(), hi / lo);
    std::printf("  (d) %s PCSI median: %s\n", d_ok ? "ok  " : "FAIL", d_msg.c_str());
}

void criterion9()
{
    auto slurp = [](const fs::path &p) {
        std::ifstream f(p, std::ios::binary);
        std::ostringstream s;
        s << f.rdbuf();
        return s.str();
    };
    const fs::path root = fs::temp_directory_path() / "rismimo_acceptance9";
    fs::remove_all(root);
    Campaign c;
    c.scenario = desk_preset();
    c.scenario.rng_seed = 109;
    c.experiment = Experiment::cdf_compare;
    c.n_drops = 6;
    c.n_fading = 3;
    c.threads = 1;
    c.output_dir = (root / "one").string();
    run_campaign(c);

    Campaign m = campaign_from_manifest(nlohmann::json::parse(slurp(root / "one" / "manifest.json")));
    m.threads = 4;
    m.output_dir = (root / "four").string();
    run_campaign(m);

    int files = 0, mismatches = 0;
    for (const auto &e : fs::directory_iterator(root / "one"))
    {
        ++files;
        mismatches += slurp(e.path()) != slurp(root / "four" / e.path().filename());
    }
    report(9, files > 0 && mismatches == 0,
           fmt("rerun from manifest with 4 threads vs 1: %d files, %d differ", files, mismatches));
}
} // namespace

int main(int argc, char **argv)
{
    std::map<int, std::function<void()>> all = {{1, criterion1}, {2, criterion2}, {3, criterion3},
                                                {4, criterion4}, {5, criterion5}, {6, criterion6},
                                                {7, criterion7}, {8, criterion8}, {9, criterion9}};
    std::vector<int> pick;
    for (int i = 1; i < argc; ++i)
        pick.push_back(std::atoi(argv[i]));
    if (pick.empty())
        for (const auto &kv : all)
            pick.push_back(kv.first);
    for (int id : pick)
    {
        try
        {
            all.at(id)();
        }
        catch (const std::exception &e)
        {
            report(id, false, std::string("exception: ") + e.what());
        }
    }
    std::printf("%d of %zu criteria failed\n", failures, pick.size());
    return failures ? 1 : 0;
}
