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

#ifndef RISMIMO_RIS_OPTIMIZER_HPP
#define RISMIMO_RIS_OPTIMIZER_HPP

#include "rismimo/config.hpp"
#include "rismimo/core.hpp"
#include "rismimo/ris_config.hpp"

#include <optional>
#include <vector>

namespace rismimo
{

/// Channel knowledge the RIS optimizers work from: the coupling matrix and one
/// vector per UE (true channels or, in any realistic pipeline, their estimates).
/// The pair matrices Q_{k,k'} = diag(h_k)^H H^H H diag(h_k') are built on demand.
class CostContext
{
public:
    CostContext(cmat H, const std::vector<cvec> &channels) : H_(std::move(H))
    {
        channels_.resize(H_.cols(), Eigen::Index(channels.size()));
        for (std::size_t k = 0; k < channels.size(); ++k)
        {
            require_dims(channels[k].size() == H_.cols(), "CostContext: channel length differs from N_R");
            channels_.col(Eigen::Index(k)) = channels[k];
        }
    }

    const cmat &H() const { return H_; }
    const cmat &channels() const { return channels_; } // N_R x K
    int ue_count() const { return int(channels_.cols()); }
    int n_ris() const { return int(H_.cols()); }

    /// Q_{k,k'}; Q_{k',k} = Q_{k,k'}^H.
    cmat pair_matrix(int k, int kp) const
    {
        ensure_pairs();
        if (k < kp)
            return pairs_[pair_index(k, kp)];
        if (k > kp)
            return pairs_[pair_index(kp, k)].adjoint();
        const cvec hk = channels_.col(k);
        return hk.conjugate().asDiagonal() * gram_ * hk.asDiagonal();
    }

    /// Composite channels H diag(p) h_k as columns (N_A x K).
    cmat composite(const cvec &p) const { return H_ * (p.asDiagonal() * channels_); }

private:
    std::size_t pair_index(int k, int kp) const
    {
        // row-major upper triangle without diagonal
        const int K = ue_count();
        return std::size_t(k * (2 * K - k - 1) / 2 + (kp - k - 1));
    }

    void ensure_pairs() const
    {
        if (!pairs_.empty() || ue_count() < 2)
            return;
        gram_ = H_.adjoint() * H_;
        for (int k = 0; k < ue_count(); ++k)
            for (int kp = k + 1; kp < ue_count(); ++kp)
                pairs_.push_back(channels_.col(k).conjugate().asDiagonal() * gram_ *
                                 channels_.col(kp).asDiagonal());
    }

    cmat H_;
    cmat channels_;
    mutable cmat gram_;
    mutable std::vector<cmat> pairs_;
};

// ------------------------------------------------------------------------
// Cost: sum over UE pairs of |hbar_k^H hbar_k'|^2

inline double cross_corr_cost(const cvec &p, const CostContext &ctx)
{
    require_dims(p.size() == ctx.n_ris(), "cross_corr_cost: P length differs from N_R");
    const cmat hb = ctx.composite(p);
    const cmat gram = hb.adjoint() * hb;
    double f = 0.0;
    for (int k = 0; k < ctx.ue_count(); ++k)
        for (int kp = k + 1; kp < ctx.ue_count(); ++kp)
            f += std::norm(gram(k, kp));
    return f;
}

inline double cross_corr_cost(const RisConfig &P, const CostContext &ctx) { return cross_corr_cost(P.diagonal(), ctx); }

/// Same cost through the quadratic forms p^H Q_{k,k'} p.
inline double cross_corr_cost_quadratic(const cvec &p, const CostContext &ctx)
{
    double f = 0.0;
    for (int k = 0; k < ctx.ue_count(); ++k)
        for (int kp = k + 1; kp < ctx.ue_count(); ++kp)
            f += std::norm(p.dot(ctx.pair_matrix(k, kp) * p));
    return f;
}

/// Gradient 2 sum_{k<k'} [ (p^H Q^H p) Q p + (p^H Q p) Q^H p ], so that
/// df = Re(grad^H dp).
inline cvec active_gradient(const cvec &p, const CostContext &ctx)
{
    require_dims(p.size() == ctx.n_ris(), "active_gradient: p length differs from N_R");
    cvec g = cvec::Zero(p.size());
    for (int k = 0; k < ctx.ue_count(); ++k)
        for (int kp = k + 1; kp < ctx.ue_count(); ++kp)
        {
            const cmat Q = ctx.pair_matrix(k, kp);
            const cvec Qp = Q * p;
            const cvec QHp = Q.adjoint() * p;
            const cplx x = p.dot(Qp);
            g += 2.0 * (std::conj(x) * Qp + x * QHp);
        }
    return g;
}

namespace detail
{
/// Gradient via composite channels, O(K N_A N_R) instead of O(K^2 N_R^2).
inline cvec active_gradient_composite(const cvec &p, const CostContext &ctx)
{
    const cmat hb = ctx.composite(p);
    cmat x = hb.adjoint() * hb;
    x.diagonal().setZero();
    const cmat acc = (ctx.H().adjoint() * hb) * x;
    return 2.0 * ctx.channels().conjugate().cwiseProduct(acc).rowwise().sum();
}

/// Allocation-free cost and gradient for the inner loops.
struct CostWorkspace
{
    explicit CostWorkspace(const CostContext &c)
        : ctx(c), ph(c.n_ris(), c.ue_count()), hb(c.H().rows(), c.ue_count()), gram(c.ue_count(), c.ue_count()),
          z(c.n_ris(), c.ue_count()), acc(c.n_ris(), c.ue_count())
    {
    }

    double cost(const cvec &p)
    {
        ph.noalias() = p.asDiagonal() * ctx.channels();
        hb.noalias() = ctx.H() * ph;
        gram.noalias() = hb.adjoint() * hb;
        double f = 0.0;
        for (Eigen::Index k = 0; k < gram.cols(); ++k)
            for (Eigen::Index j = k + 1; j < gram.cols(); ++j)
                f += std::norm(gram(k, j));
        return f;
    }

    /// Gradient at the point of the last cost() call.
    void gradient(cvec &g)
    {
        gram.diagonal().setZero();
        z.noalias() = ctx.H().adjoint() * hb;
        acc.noalias() = z * gram;
        g.noalias() = 2.0 * ctx.channels().conjugate().cwiseProduct(acc).rowwise().sum();
    }

    const CostContext &ctx;
    cmat ph, hb, gram, z, acc;
};
} // namespace detail

// ------------------------------------------------------------------------
// Optimizers

struct OptimizerResult
{
    RisConfig config;
    std::vector<double> cost_trace; // cost before the first and after every sweep / iteration
    int iterations = 0;
    bool converged = false;
};

struct PassiveOptions
{
    int grid_size = 256;             // ignored when phase_bits is set
    int max_sweeps = 100;
    double tol = 1e-6;               // relative decrease per sweep
    std::optional<int> phase_bits;   // restricts the search grid to 2^bits phases
};

/// Element-wise alternating minimisation over unit-modulus phases. Each element is
/// set to the best grid phase with the others fixed; an element only moves when
/// that strictly lowers the cost, so the cost never increases.
inline OptimizerResult optimize_passive(const CostContext &ctx, const RisConfig &init, const PassiveOptions &opt = {})
{
    require_dims(init.size() == ctx.n_ris(), "optimize_passive: init length differs from N_R");
    const int K = ctx.ue_count();
    const int nr = ctx.n_ris();
    const int G = opt.phase_bits ? (1 << *opt.phase_bits) : opt.grid_size;

    OptimizerResult res;
    res.config = RisConfig::passive(init.coefficients, opt.phase_bits);
    cvec p = init.coefficients;
    double cost = cross_corr_cost(p, ctx);
    res.cost_trace.push_back(cost);
    if (K < 2 || cost == 0.0)
    {
        res.converged = true;
        return res;
    }

    cvec grid(G);
    for (int m = 0; m < G; ++m)
        grid(m) = std::polar(1.0, 2.0 * pi * m / G);

    const int npairs = K * (K - 1) / 2;
    std::vector<cplx> A(npairs), B(npairs), C(npairs);
    const cmat &hh = ctx.channels();

    for (int sweep = 0; sweep < opt.max_sweeps; ++sweep)
    {
        cmat hb = ctx.composite(p);
        for (int i = 0; i < nr; ++i)
        {
            // hbar_k(p_i) = r_k + p_i s_k
            const cmat s = ctx.H().col(i) * hh.row(i);
            const cmat r = hb - p(i) * s;
            int idx = 0;
            for (int k = 0; k < K; ++k)
                for (int kp = k + 1; kp < K; ++kp, ++idx)
                {
                    A[idx] = r.col(k).dot(r.col(kp)) + s.col(k).dot(s.col(kp)); // |p_i|^2 = 1
                    B[idx] = r.col(k).dot(s.col(kp));
                    C[idx] = s.col(k).dot(r.col(kp));
                }
            auto eval = [&](cplx z) {
                double f = 0.0;
                for (int t = 0; t < npairs; ++t)
                    f += std::norm(A[t] + z * B[t] + std::conj(z) * C[t]);
                return f;
            };

            const double current = eval(p(i));
            int best = -1;
            double best_cost = current;
            for (int m = 0; m < G; ++m)
            {
                const double f = eval(grid(m));
                if (f < best_cost)
                {
                    best_cost = f;
                    best = m;
                }
            }
            if (best >= 0 && best_cost < current * (1.0 - 1e-12))
            {
                hb += (grid(best) - p(i)) * s;
                p(i) = grid(best);
            }
        }

        const double next = cross_corr_cost(p, ctx);
        res.iterations = sweep + 1;
        // exact recomputation can only differ from the incremental value by rounding
        const double prev = res.cost_trace.back();
        res.cost_trace.push_back(std::min(next, prev));
        if (next > prev)
            p = res.config.coefficients;
        else
            res.config.coefficients = p;
        if (next == 0.0 || prev - next <= opt.tol * prev)
        {
            res.converged = true;
            break;
        }
    }
    return res;
}

struct ActiveOptions
{
    int max_iters = 2000;
    double tol = 1e-6;       // relative decrease per iteration
    int max_backtracks = 30;
    double initial_step = 1.0;
    double shrink = 0.5;
};

/// Projected gradient on the unit sphere, p <- (p - a g) / |p - a g|, with the
/// step measured along the normalised gradient and halved until the cost strictly
/// decreases. Iterations that fail to decrease the cost are not committed. The
/// first trial step of an iteration is twice the last accepted one, capped at
/// initial_step.
inline OptimizerResult optimize_active_direction(const CostContext &ctx, const cvec &init,
                                                 const ActiveOptions &opt = {})
{
    require_dims(init.size() == ctx.n_ris(), "optimize_active_direction: init length differs from N_R");
    OptimizerResult res;
    cvec p = init / init.norm();
    detail::CostWorkspace ws(ctx);
    double f = ws.cost(p);
    res.cost_trace.push_back(f);
    cvec g(p.size()), dir(p.size()), cand(p.size());
    double last_step = 0.5 * opt.initial_step;

    for (int it = 0; it < opt.max_iters; ++it)
    {
        if (f == 0.0)
        {
            res.converged = true;
            break;
        }
        ws.gradient(g); // workspace holds p: the last evaluation was the accepted point
        const double gn = g.norm();
        if (!(gn > 0.0))
        {
            res.converged = true;
            break;
        }
        dir = g / gn;

        double step = std::min(opt.initial_step, 2.0 * last_step);
        bool moved = false;
        double fc = f;
        for (int b = 0; b <= opt.max_backtracks; ++b, step *= opt.shrink)
        {
            cand = p - step * dir;
            const double n = cand.norm();
            if (!(n > 0.0))
                continue;
            cand /= n;
            fc = ws.cost(cand);
            if (fc < f)
            {
                moved = true;
                break;
            }
        }
        res.iterations = it + 1;
        if (!moved)
        {
            res.converged = true;
            break;
        }
        const double decrease = (f - fc) / f;
        last_step = step;
        p = cand;
        f = fc;
        res.cost_trace.push_back(f);
        if (decrease < opt.tol)
        {
            res.converged = true;
            break;
        }
    }
    res.config = RisConfig::active(p / p.norm(), 1.0);
    return res;
}

// ------------------------------------------------------------------------
// Active-RIS power accounting

/// tr(P~ H^T H^* P~^H) for a diagonal P~ given by its diagonal.
inline double reflection_trace(const cvec &p, const cmat &H)
{
    require_dims(p.size() == H.cols(), "reflection_trace: p length differs from N_R");
    return (p.cwiseAbs2().array() * H.colwise().squaredNorm().transpose().array()).sum();
}

/// Left-hand side of the RIS power constraint: power reflected and amplified when
/// the array radiates `array_power` in total through precoders of its choosing.
inline double ris_power_constraint_lhs(const cvec &ris_diagonal, const cmat &H, double array_power, double ris_noise)
{
    return array_power * reflection_trace(ris_diagonal, H) + ris_noise * ris_diagonal.squaredNorm();
}

/// omega_RIS that makes the RIS spend exactly eps P_B given a unit-norm direction.
inline double ris_power_scale(const cvec &direction, const cmat &H, double eps, double power_budget,
                              double ris_noise)
{
    if (!(eps >= 0.0 && eps < 1.0))
        throw invalid_config("ris_power_scale: eps must lie in [0, 1)");
    return eps * power_budget / ((1.0 - eps) * power_budget * reflection_trace(direction, H) + ris_noise);
}

// ------------------------------------------------------------------------
// Phase quantization

inline double quantize_phase(double phase, int bits)
{
    const int G = 1 << bits;
    const double step = 2.0 * pi / G;
    long m = std::lround(phase / step) % G;
    if (m < 0)
        m += G;
    return step * double(m);
}

/// Snap every phase to the nearest of 2^bits uniform points, keeping amplitudes.
inline RisConfig quantize_phases(const RisConfig &P, int bits)
{
    if (bits < 1)
        throw invalid_config("quantize_phases: need at least one bit");
    RisConfig out = P;
    for (Eigen::Index i = 0; i < P.size(); ++i)
        out.coefficients(i) = std::polar(std::abs(P.coefficients(i)), quantize_phase(std::arg(P.coefficients(i)), bits));
    out.phase_bits = bits;
    return out;
}

inline cvec random_grid_phases(rng_t &rng, Eigen::Index n, int bits)
{
    const int G = 1 << bits;
    std::uniform_int_distribution<int> pick(0, G - 1);
    cvec v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v(i) = std::polar(1.0, 2.0 * pi * pick(rng) / G);
    return v;
}

// ------------------------------------------------------------------------
// Full RIS design for one realization, from channel knowledge only.

struct RisDesign
{
    RisConfig config;
    OptimizerResult optimizer; // empty trace for the random policy
};

inline RisDesign design_ris(const CostContext &ctx, const ScenarioConfig &config, rng_t &rng)
{
    const Eigen::Index n = ctx.n_ris();
    RisDesign d;
    cvec init = config.phase_bits ? random_grid_phases(rng, n, *config.phase_bits) : random_phases(rng, n);

    if (!config.amplifies())
    {
        const RisConfig start = RisConfig::passive(init, config.phase_bits);
        if (config.ris_policy == RisPolicy::random)
        {
            d.config = start;
            return d;
        }
        PassiveOptions opt;
        opt.grid_size = config.passive_grid_size;
        opt.max_sweeps = config.passive_max_sweeps;
        opt.tol = config.optimizer_tol;
        opt.phase_bits = config.phase_bits;
        d.optimizer = optimize_passive(ctx, start, opt);
        d.config = d.optimizer.config;
        return d;
    }

    cvec direction = init / std::sqrt(double(n));
    if (config.ris_policy == RisPolicy::optimized)
    {
        ActiveOptions opt;
        opt.max_iters = config.active_max_iters;
        opt.tol = config.optimizer_tol;
        d.optimizer = optimize_active_direction(ctx, direction, opt);
        direction = d.optimizer.config.coefficients;
    }
    RisConfig P = RisConfig::active(direction, 1.0);
    if (config.phase_bits)
        P = quantize_phases(P, *config.phase_bits);
    P.omega_ris = ris_power_scale(P.coefficients, ctx.H(), config.power_split, config.power_budget,
                                  config.ris_noise_power());
    d.config = P;
    return d;
}

} // namespace rismimo

#endif
