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

#ifndef RISMIMO_POWER_CONTROL_HPP
#define RISMIMO_POWER_CONTROL_HPP

#include "rismimo/core.hpp"

#include <Eigen/LU>

#include <limits>
#include <optional>
#include <vector>

namespace rismimo
{

/// Generic downlink SINR
///   gamma_k = eta_k a_k / (sum_j eta_j b(j,k) + delta c_k + sigma_k^2).
/// b(k,k) carries self-interference (beamforming uncertainty) and is zero for
/// perfect CSI.
struct SinrCoefficients
{
    rvec a;
    rmat b;
    rvec c;
    int delta = 0;
    rvec noise;          // sigma_k^2, watts
    rvec precoder_norms; // |w_k|^2, or its mean for random precoders
    double budget = 0.0; // (1 - eps) P_B

    int ue_count() const { return int(a.size()); }

    rvec effective_noise() const { return noise + double(delta) * c; }
};

inline void check_coefficients(const SinrCoefficients &s)
{
    const Eigen::Index K = s.a.size();
    require_dims(s.b.rows() == K && s.b.cols() == K && s.c.size() == K && s.noise.size() == K &&
                     s.precoder_norms.size() == K,
                 "SinrCoefficients: inconsistent sizes");
    if ((s.a.array() <= 0.0).any())
        throw ill_posed("power control: every desired-signal gain a_k must be positive");
    if ((s.noise.array() <= 0.0).any())
        throw ill_posed("power control: noise powers must be positive");
    if (!(s.budget > 0.0))
        throw ill_posed("power control: power budget must be positive");
}

inline rvec sinr_from_coefficients(const SinrCoefficients &s, const rvec &eta)
{
    const rvec denom = s.b.transpose() * eta + s.effective_noise();
    return eta.cwiseProduct(s.a).cwiseQuotient(denom);
}

inline double transmit_power(const SinrCoefficients &s, const rvec &eta) { return eta.dot(s.precoder_norms); }

struct FeasibilityResult
{
    bool feasible = false;
    rvec eta;             // budget-saturating candidate when feasible
    rvec minimal_eta;     // componentwise-minimal solution meeting every target
    double minimal_power = 0.0;
};

/// Can every UE reach SINR t within the budget? Solves the target-SINR equality
/// system (I - t D_a^-1 B^T) eta = t D_a^-1 n; with nonnegative couplings and n > 0
/// a positive solution exists iff the spectral radius of t D_a^-1 B^T is below one,
/// and it is then the minimal-power allocation. A feasible candidate is scaled up
/// to use the full budget, which can only raise every SINR.
inline FeasibilityResult feasibility_check(double t, const SinrCoefficients &s)
{
    check_coefficients(s);
    if (!(t > 0.0))
        throw invalid_config("feasibility_check: target SINR must be positive");
    const Eigen::Index K = s.a.size();
    const rvec inv_a = s.a.cwiseInverse();
    const rmat M = t * inv_a.asDiagonal() * s.b.transpose();
    const rvec rhs = t * inv_a.cwiseProduct(s.effective_noise());

    FeasibilityResult r;
    Eigen::PartialPivLU<rmat> lu(rmat::Identity(K, K) - M);
    const rvec eta = lu.solve(rhs);
    if (!eta.allFinite() || (eta.array() <= 0.0).any())
        return r;
    // reject ill-conditioned solves that do not reproduce the system
    const rvec resid = (rmat::Identity(K, K) - M) * eta - rhs;
    if (resid.norm() > 1e-8 * rhs.norm() + 1e-300)
        return r;

    r.minimal_eta = eta;
    r.minimal_power = transmit_power(s, eta);
    if (r.minimal_power > s.budget)
        return r;
    r.feasible = true;
    r.eta = eta * (s.budget / r.minimal_power);
    return r;
}

struct BisectionStep
{
    double t = 0.0;
    bool feasible = false;
};

struct PowerAllocation
{
    rvec eta;
    rvec sinr;           // per-UE SINR at eta
    double t_star = 0.0; // min SINR at eta
    double t_lower = 0.0, t_upper = 0.0;
    bool feasible = false;
    int iterations = 0;
    std::vector<BisectionStep> trace;
};

inline double sinr_upper_limit(const SinrCoefficients &s)
{
    double t = 0.0;
    for (int k = 0; k < s.ue_count(); ++k)
        t = std::max(t, s.a(k) * s.budget / (s.precoder_norms(k) * s.noise(k)));
    return t;
}

/// Max-min SINR by bisection on t. Iterates while t_max - t_min >= nu, and keeps
/// going (up to max_iters) until the SINRs at the budget-scaled candidate are
/// balanced within nu.
inline PowerAllocation maxmin_bisection(const SinrCoefficients &s, double nu = 1e-4, double t_min = 0.0,
                                        std::optional<double> t_max_in = std::nullopt, int max_iters = 400)
{
    check_coefficients(s);
    if (!(nu > 0.0))
        throw invalid_config("maxmin_bisection: tolerance must be positive");

    PowerAllocation out;
    FeasibilityResult best;
    if (t_min > 0.0)
    {
        best = feasibility_check(t_min, s);
        out.trace.push_back({t_min, best.feasible});
        if (!best.feasible)
            throw infeasible("maxmin_bisection: the lower end of the search interval is infeasible");
    }

    double t_max = t_max_in.value_or(sinr_upper_limit(s));
    if (!(t_max > t_min))
        t_max = std::max(2.0 * t_min, nu);
    for (int i = 0; i < 200; ++i)
    {
        const FeasibilityResult r = feasibility_check(t_max, s);
        out.trace.push_back({t_max, r.feasible});
        if (!r.feasible)
            break;
        t_min = t_max;
        best = r;
        t_max *= 2.0;
    }

    auto spread = [&](const FeasibilityResult &r) {
        if (!r.feasible)
            return std::numeric_limits<double>::infinity();
        const rvec g = sinr_from_coefficients(s, r.eta);
        return g.maxCoeff() - g.minCoeff();
    };

    int it = 0;
    while (it < max_iters && (t_max - t_min >= nu || spread(best) >= nu))
    {
        const double t = 0.5 * (t_min + t_max);
        if (!(t > t_min && t < t_max))
            break; // interval exhausted at double precision
        const FeasibilityResult r = feasibility_check(t, s);
        out.trace.push_back({t, r.feasible});
        if (r.feasible)
        {
            t_min = t;
            best = r;
        }
        else
            t_max = t;
        ++it;
    }

    // t* below the first probe: halve until something is feasible
    for (int i = 0; !best.feasible && i < 2000; ++i)
    {
        const double t = 0.5 * t_max;
        best = feasibility_check(t, s);
        out.trace.push_back({t, best.feasible});
        if (best.feasible)
            t_min = t;
        else
            t_max = t;
    }
    if (!best.feasible)
        throw infeasible("maxmin_bisection: no positive SINR target is feasible");

    out.iterations = it;
    out.eta = best.eta;
    out.sinr = sinr_from_coefficients(s, out.eta);
    out.t_star = out.sinr.minCoeff();
    out.t_lower = t_min;
    out.t_upper = t_max;
    out.feasible = true;
    return out;
}

/// Equal split of the budget, eta_k = budget / sum_j |w_j|^2.
inline rvec equal_power(const SinrCoefficients &s)
{
    return rvec::Constant(s.ue_count(), s.budget / s.precoder_norms.sum());
}

} // namespace rismimo

#endif
