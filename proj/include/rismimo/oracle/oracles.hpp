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

// Brute-force and textbook reference implementations. Slow on purpose; used by the
// test suite and `rismimo oracle`, never by the library itself.

#ifndef RISMIMO_ORACLE_ORACLES_HPP
#define RISMIMO_ORACLE_ORACLES_HPP

#include "rismimo/channel_estimation.hpp"
#include "rismimo/core.hpp"
#include "rismimo/power_control.hpp"

#include <Eigen/LU>
#include <Eigen/QR>

#include <functional>
#include <vector>

namespace rismimo::oracle
{

// ------------------------------------------------------------------------
// LMMSE from the full observation model

/// Builds E[h y^H] and E[y y^H] of the stacked Q N_A observation from the training
/// matrices directly, projects on U, and solves with column-pivoting QR. Returns the
/// N_R x Q N_A filter mapping y_k to the estimate.
inline cmat lmmse_filter(int k, const TrainingBasis &basis, const PilotBook &pilots, const rvec &beta,
                         const TrainingNoise &noise)
{
    const Eigen::Index na = basis.n_active();
    const Eigen::Index nr = basis.n_ris();
    const Eigen::Index m = na * basis.epochs();
    const double tau = pilots.length();

    cmat A(m, nr);
    cmat noise_cov = cmat::Zero(m, m);
    for (int q = 0; q < basis.epochs(); ++q)
    {
        const cmat HP = basis.H * basis.configs[q].asDiagonal();
        A.middleRows(q * na, na) = HP;
        noise_cov.block(q * na, q * na, na, na) = double(noise.delta) * noise.ris_noise * tau * HP * HP.adjoint();
    }
    noise_cov.diagonal().array() += noise.array_noise * tau;

    cmat Ryy = noise_cov;
    for (int j = 0; j < pilots.ue_count(); ++j)
    {
        const double rho = pilots.pilot_of(j).dot(pilots.pilot_of(k));
        Ryy += rho * rho * pilots.uplink_powers(j) * beta(j) * A * A.adjoint();
    }
    const double rho_kk = pilots.pilot_of(k).squaredNorm();
    const cmat Rhy = rho_kk * std::sqrt(pilots.uplink_powers(k)) * beta(k) * A.adjoint();

    const cmat &U = basis.U;
    const cmat Rhy_r = Rhy * U;
    const cmat Ryy_r = U.adjoint() * Ryy * U;
    // W = Rhy_r Ryy_r^-1  <=>  Ryy_r^H W^H = Rhy_r^H
    const cmat Wt = Ryy_r.adjoint().colPivHouseholderQr().solve(Rhy_r.adjoint());
    return Wt.adjoint() * U.adjoint();
}

// ------------------------------------------------------------------------
// RIS optimisation references

inline double cost_direct(const cmat &H, const std::vector<cvec> &h, const cvec &p)
{
    double f = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k)
        for (std::size_t j = k + 1; j < h.size(); ++j)
        {
            const cvec a = H * p.cwiseProduct(h[k]);
            const cvec b = H * p.cwiseProduct(h[j]);
            f += std::norm(a.dot(b));
        }
    return f;
}

struct ExhaustiveResult
{
    double best_cost = 0.0;
    cvec best;
    long evaluated = 0;
};

/// Every configuration with phases on a G-point grid (G^N_R of them).
inline ExhaustiveResult exhaustive_passive(const cmat &H, const std::vector<cvec> &h, int grid)
{
    const Eigen::Index n = H.cols();
    std::vector<int> idx(n, 0);
    ExhaustiveResult r;
    r.best_cost = std::numeric_limits<double>::infinity();
    cvec p(n);
    for (;;)
    {
        for (Eigen::Index i = 0; i < n; ++i)
            p(i) = std::polar(1.0, 2.0 * pi * idx[i] / grid);
        const double f = cost_direct(H, h, p);
        ++r.evaluated;
        if (f < r.best_cost)
        {
            r.best_cost = f;
            r.best = p;
        }
        Eigen::Index i = 0;
        while (i < n && ++idx[i] == grid)
            idx[i++] = 0;
        if (i == n)
            break;
    }
    return r;
}

/// Best of `samples` random unit-norm directions.
inline double random_search_active(const cmat &H, const std::vector<cvec> &h, long samples, rng_t &rng)
{
    double best = std::numeric_limits<double>::infinity();
    for (long s = 0; s < samples; ++s)
    {
        cvec p = complex_normal_vector(rng, H.cols());
        p /= p.norm();
        best = std::min(best, cost_direct(H, h, p));
    }
    return best;
}

/// Central difference of f along d: (f(p + s d) - f(p - s d)) / 2s.
inline double directional_derivative(const std::function<double(const cvec &)> &f, const cvec &p, const cvec &d,
                                     double step)
{
    return (f(p + step * d) - f(p - step * d)) / (2.0 * step);
}

// ------------------------------------------------------------------------
// Power control references (two users)

struct GridMaxMin
{
    double best_min_sinr = 0.0;
    rvec eta;
};

/// Scans `points` allocations on the budget line eta_1 |w_1|^2 + eta_2 |w_2|^2 = budget.
inline GridMaxMin grid_maxmin_2ue(const SinrCoefficients &s, int points)
{
    GridMaxMin g;
    for (int i = 1; i < points; ++i)
    {
        const double frac = double(i) / double(points);
        rvec eta(2);
        eta(0) = frac * s.budget / s.precoder_norms(0);
        eta(1) = (1.0 - frac) * s.budget / s.precoder_norms(1);
        const double m = sinr_from_coefficients(s, eta).minCoeff();
        if (m > g.best_min_sinr)
        {
            g.best_min_sinr = m;
            g.eta = eta;
        }
    }
    return g;
}

/// Any grid allocation reaching t for both users.
inline bool grid_feasible_2ue(const SinrCoefficients &s, double t, int points)
{
    return grid_maxmin_2ue(s, points).best_min_sinr >= t;
}

// ------------------------------------------------------------------------
// Downlink references

/// Symbol-level simulation of the downlink model; returns desired power over the
/// power of everything else, per UE.
inline rvec symbol_level_sinr(const cmat &H, const cvec &ris_diagonal, const std::vector<cvec> &h, const cmat &W,
                              const rvec &eta, const rvec &ue_noise, double ris_noise, int delta, long symbols,
                              rng_t &rng)
{
    const int K = int(h.size());
    const Eigen::Index nr = H.cols();
    rvec sig = rvec::Zero(K), rest = rvec::Zero(K);
    cvec x(K);
    for (long t = 0; t < symbols; ++t)
    {
        for (int j = 0; j < K; ++j)
            x(j) = complex_normal(rng);
        const cvec tx = W * eta.cwiseSqrt().cast<cplx>().cwiseProduct(x);
        const cvec zR = complex_normal_vector(rng, nr, ris_noise);
        for (int k = 0; k < K; ++k)
        {
            // r_k = (H P h_k)^T tx + delta h_k^T P z_R + z_k
            const cvec hp = ris_diagonal.cwiseProduct(h[k]);
            const cvec hb = H * hp;
            const cplx desired = std::sqrt(eta(k)) * (hb.transpose() * W.col(k))(0) * x(k);
            const cplx r = (hb.transpose() * tx)(0) + double(delta) * (hp.transpose() * zR)(0) +
                           complex_normal(rng, ue_noise(k));
            sig(k) += std::norm(desired);
            rest(k) += std::norm(r - desired);
        }
    }
    return sig.cwiseQuotient(rest);
}

/// Monte Carlo of E|x^H A x|^2 for x ~ CN(0, R).
inline double quadratic_form_second_moment(const cmat &R, const cmat &A, long n, rng_t &rng)
{
    Eigen::LLT<cmat> llt(R);
    const cmat L = llt.matrixL();
    double acc = 0.0;
    for (long t = 0; t < n; ++t)
    {
        const cvec x = L * complex_normal_vector(rng, R.rows());
        acc += std::norm(x.dot(A * x));
    }
    return acc / double(n);
}

} // namespace rismimo::oracle

#endif
