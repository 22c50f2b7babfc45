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

#ifndef RISMIMO_CHANNEL_ESTIMATION_HPP
#define RISMIMO_CHANNEL_ESTIMATION_HPP

#include "rismimo/config.hpp"
#include "rismimo/core.hpp"
#include "rismimo/geometry_channel.hpp"

#include <Eigen/SVD>

#include <limits>
#include <vector>

namespace rismimo
{

// ------------------------------------------------------------------------
// Pilots

struct PilotBook
{
    rmat sequences;              // tau_p x tau_p, column m is pilot m, squared norm tau_p
    std::vector<int> assignment; // UE -> pilot column
    rmat cross_corr;             // K x K, rho_{j,k} = phi_j^T phi_k
    rvec uplink_powers;          // eta_k^(u,t), watts

    int length() const { return int(sequences.rows()); }
    int ue_count() const { return int(assignment.size()); }
    Eigen::VectorXd pilot_of(int k) const { return sequences.col(assignment[k]); }

    /// Users sharing the pilot of UE k, k included.
    std::vector<int> copilot_set(int k) const
    {
        std::vector<int> out;
        for (int j = 0; j < ue_count(); ++j)
            if (assignment[j] == assignment[k])
                out.push_back(j);
        return out;
    }
};

/// Real orthogonal pilots: Sylvester-Hadamard rows when tau_p is a power of two,
/// otherwise the scaled canonical basis. Users beyond tau_p reuse pilots round-robin.
inline PilotBook make_pilot_book(int tau_p, const rvec &uplink_powers)
{
    if (tau_p < 1)
        throw invalid_config("make_pilot_book: tau_p must be >= 1");
    PilotBook book;
    const bool pow2 = (tau_p & (tau_p - 1)) == 0;
    if (pow2)
    {
        rmat had = rmat::Ones(1, 1);
        while (had.rows() < tau_p)
        {
            const Eigen::Index n = had.rows();
            rmat next(2 * n, 2 * n);
            next << had, had, had, -had;
            had = next;
        }
        book.sequences = had;
    }
    else
        book.sequences = std::sqrt(double(tau_p)) * rmat::Identity(tau_p, tau_p);

    const int K = int(uplink_powers.size());
    book.uplink_powers = uplink_powers;
    for (int k = 0; k < K; ++k)
        book.assignment.push_back(k % tau_p);
    book.cross_corr.resize(K, K);
    for (int j = 0; j < K; ++j)
        for (int k = 0; k < K; ++k)
            book.cross_corr(j, k) = book.pilot_of(j).dot(book.pilot_of(k));
    return book;
}

inline PilotBook make_pilot_book(int tau_p, int ue_count, double uplink_power)
{
    return make_pilot_book(tau_p, rvec::Constant(ue_count, uplink_power));
}

// ------------------------------------------------------------------------
// Training configurations

/// Power leaving an RIS with diagonal `p` when every element sees `incident_power`
/// of signal and injects amplifier noise `ris_noise`:
/// tr(P (incident I) P^H) + sigma_R^2 tr(P P^H).
inline double reflected_power(const cvec &p, double incident_power, double ris_noise)
{
    return (incident_power + ris_noise) * p.squaredNorm();
}

/// Q = ceil(N_R / N_A) random-phase diagonals. An amplifying RIS scales all of them
/// by a common amplitude chosen so that the reflected power grows by
/// `active_training_gain`; both terms of reflected_power() are quadratic in that
/// amplitude, hence its square root.
inline std::vector<cvec> make_training_configs(const ScenarioConfig &config, rng_t &rng)
{
    const int Q = config.training_epochs();
    const double amplitude = config.amplifies() ? std::sqrt(config.active_training_gain) : 1.0;
    std::vector<cvec> out;
    for (int q = 0; q < Q; ++q)
        out.push_back(amplitude * random_phases(rng, config.n_ris));
    return out;
}

// ------------------------------------------------------------------------
// Stacked training matrix and its truncated SVD

struct TrainingBasis
{
    cmat H;                      // coupling matrix used to build the stack
    std::vector<cvec> configs;   // Q training diagonals
    cmat stacked;                // Q N_A x N_R
    cmat U;                      // Q N_A x S
    rvec singular_values;        // S, descending, positive
    cmat V;                      // N_R x S
    rvec all_singular_values;    // full spectrum
    int rank = 0;
    int retained = 0;            // S
    double energy_captured = 0.0;

    int epochs() const { return int(configs.size()); }
    int n_active() const { return int(H.rows()); }
    int n_ris() const { return int(H.cols()); }
};

/// Smallest S whose squared singular values reach `energy_fraction` of the total.
/// With `strict` the result is clamped to S < rank.
inline TrainingBasis build_training_basis(const cmat &H, const std::vector<cvec> &configs, double energy_fraction,
                                          bool strict = true)
{
    if (configs.empty())
        throw invalid_config("build_training_basis: no training configurations");
    if (!(energy_fraction > 0.0 && energy_fraction <= 1.0))
        throw invalid_config("build_training_basis: energy fraction must lie in (0, 1]");
    const Eigen::Index na = H.rows();
    const Eigen::Index nr = H.cols();

    TrainingBasis b;
    b.H = H;
    b.configs = configs;
    b.stacked.resize(na * Eigen::Index(configs.size()), nr);
    for (std::size_t q = 0; q < configs.size(); ++q)
    {
        require_dims(configs[q].size() == nr, "build_training_basis: configuration length differs from N_R");
        b.stacked.middleRows(Eigen::Index(q) * na, na) = H * configs[q].asDiagonal();
    }

    Eigen::JacobiSVD<cmat> svd(b.stacked, Eigen::ComputeThinU | Eigen::ComputeThinV);
    b.all_singular_values = svd.singularValues();
    const rvec &sv = b.all_singular_values;
    if (sv.size() == 0 || !(sv(0) > 0.0))
        throw rank_deficient("build_training_basis: stacked training matrix is zero");

    const double tol = double(std::max(b.stacked.rows(), b.stacked.cols())) *
                       std::numeric_limits<double>::epsilon() * sv(0);
    b.rank = int((sv.array() > tol).count());

    const double total = sv.squaredNorm();
    double acc = 0.0;
    int S = 0;
    while (S < b.rank)
    {
        acc += sv(S) * sv(S);
        ++S;
        if (acc >= energy_fraction * total * (1.0 - 1e-12))
            break;
    }
    if (strict && b.rank > 1)
        S = std::min(S, b.rank - 1);
    S = std::max(S, 1);

    b.retained = S;
    b.singular_values = sv.head(S);
    b.energy_captured = b.singular_values.squaredNorm() / total;
    b.U = svd.matrixU().leftCols(S);
    b.V = svd.matrixV().leftCols(S);
    return b;
}

// ------------------------------------------------------------------------
// Training simulation

struct TrainingNoise
{
    double array_noise = 0.0; // sigma_A^2 per antenna and symbol
    double ris_noise = 0.0;   // sigma_R^2 per RIS element and symbol
    int delta = 0;            // 1 when the RIS forwards amplifier noise

    static TrainingNoise from(const ScenarioConfig &c) { return {c.noise_power(), c.ris_noise_power(), c.delta()}; }
};

/// Per-UE stacked observations y_k (length Q N_A) after projecting each epoch's
/// received block on the UE's pilot.
inline std::vector<cvec> simulate_training(const std::vector<cvec> &h, const TrainingBasis &basis,
                                           const PilotBook &pilots, const TrainingNoise &noise, rng_t &rng)
{
    const int K = int(h.size());
    require_dims(K == pilots.ue_count(), "simulate_training: channel count differs from pilot assignment");
    const Eigen::Index na = basis.n_active();
    const Eigen::Index nr = basis.n_ris();
    const int tau = pilots.length();
    std::vector<cvec> y(K, cvec(na * basis.epochs()));

    for (int q = 0; q < basis.epochs(); ++q)
    {
        const cmat HP = basis.H * basis.configs[q].asDiagonal();
        cmat Y = complex_normal_matrix(rng, na, tau, noise.array_noise);
        if (noise.delta)
            Y += HP * complex_normal_matrix(rng, nr, tau, noise.ris_noise);
        for (int k = 0; k < K; ++k)
        {
            require_dims(h[k].size() == nr, "simulate_training: channel length differs from N_R");
            Y += std::sqrt(pilots.uplink_powers(k)) * (HP * h[k]) * pilots.pilot_of(k).transpose().cast<cplx>();
        }
        for (int k = 0; k < K; ++k)
            y[k].segment(q * na, na) = Y * pilots.pilot_of(k).cast<cplx>();
    }
    return y;
}

// ------------------------------------------------------------------------
// Reduced-dimension LMMSE

struct EstimateSet
{
    std::vector<cvec> estimates;             // h-hat_k
    std::vector<cmat> R_est;                 // covariance of h-hat_k
    std::vector<cmat> R_err;                 // beta_k I - R_est
    std::vector<std::vector<int>> copilot_sets;
    rmat copilot_scale;                      // c_{k,j}, meaningful for j in copilot_sets[k]
};

/// Per-UE linear filters; they depend only on statistics, so one instance serves
/// every fading realization of a drop.
class LmmseEstimator
{
public:
    LmmseEstimator(const TrainingBasis &basis, const PilotBook &pilots, const rvec &beta, const TrainingNoise &noise)
    {
        const int K = pilots.ue_count();
        require_dims(beta.size() == K, "LmmseEstimator: beta length differs from UE count");
        const Eigen::Index S = basis.retained;
        const Eigen::Index na = basis.n_active();
        const Eigen::Index nr = basis.n_ris();
        const double tau = pilots.length();
        const rvec &lam = basis.singular_values;

        cmat Z = cmat::Zero(S, S);
        if (noise.delta)
            for (int q = 0; q < basis.epochs(); ++q)
            {
                const cmat HP = basis.H * basis.configs[q].asDiagonal();
                const cmat Uq = basis.U.middleRows(Eigen::Index(q) * na, na);
                const cmat A = Uq.adjoint() * HP;
                Z += A * A.adjoint();
            }

        filters_.resize(K);
        R_est_.resize(K);
        R_err_.resize(K);
        for (int k = 0; k < K; ++k)
        {
            double load = 0.0;
            for (int j = 0; j < K; ++j)
                load += pilots.cross_corr(j, k) * pilots.cross_corr(j, k) * pilots.uplink_powers(j) * beta(j);

            cmat Ryy = noise.ris_noise * tau * double(noise.delta) * Z;
            Ryy.diagonal().array() += load * lam.array().square() + noise.array_noise * tau;

            // R_{v y} = tau sqrt(eta_k) beta_k Lambda (real diagonal)
            const rvec rvy = tau * std::sqrt(pilots.uplink_powers(k)) * beta(k) * lam;
            const cmat gain = solve_hermitian(Ryy, cmat(rvy.cast<cplx>().asDiagonal())).adjoint(); // R_vy R_yy^-1

            filters_[k] = basis.V * gain * basis.U.adjoint();
            const cmat Rv = gain * rvy.cast<cplx>().asDiagonal();
            cmat Rh = basis.V * Rv * basis.V.adjoint();
            Rh = 0.5 * (Rh + Rh.adjoint()).eval();
            R_est_[k] = Rh;
            R_err_[k] = beta(k) * cmat::Identity(nr, nr) - Rh;
        }

        copilot_sets_.resize(K);
        copilot_scale_ = rmat::Zero(K, K);
        for (int k = 0; k < K; ++k)
        {
            copilot_sets_[k] = pilots.copilot_set(k);
            for (int j : copilot_sets_[k])
                copilot_scale_(k, j) =
                    beta(k) / beta(j) * std::sqrt(pilots.uplink_powers(k) / pilots.uplink_powers(j));
        }
    }

    int ue_count() const { return int(filters_.size()); }

    cvec estimate(int k, const cvec &y) const
    {
        require_dims(y.size() == filters_[k].cols(), "LmmseEstimator: observation length differs from Q N_A");
        return filters_[k] * y;
    }

    EstimateSet estimate_all(const std::vector<cvec> &y) const
    {
        require_dims(int(y.size()) == ue_count(), "LmmseEstimator: observation count differs from UE count");
        EstimateSet out;
        for (int k = 0; k < ue_count(); ++k)
            out.estimates.push_back(estimate(k, y[k]));
        out.R_est = R_est_;
        out.R_err = R_err_;
        out.copilot_sets = copilot_sets_;
        out.copilot_scale = copilot_scale_;
        return out;
    }

    const cmat &filter(int k) const { return filters_[k]; }
    const cmat &estimate_covariance(int k) const { return R_est_[k]; }
    const cmat &error_covariance(int k) const { return R_err_[k]; }
    const std::vector<cmat> &estimate_covariances() const { return R_est_; }
    const std::vector<int> &copilot_set(int k) const { return copilot_sets_[k]; }
    double copilot_scale(int k, int j) const { return copilot_scale_(k, j); }

private:
    // Cholesky on R, retried once with 1e-12 tr(R)/S diagonal jitter.
    static cmat solve_hermitian(const cmat &R, const cmat &rhs)
    {
        Eigen::LLT<cmat> llt(R);
        if (llt.info() == Eigen::Success)
            return llt.solve(rhs);
        cmat Rj = R;
        Rj.diagonal().array() += 1e-12 * R.trace().real() / double(R.rows());
        llt.compute(Rj);
        if (llt.info() != Eigen::Success)
            throw singular_covariance("LMMSE: observation covariance is numerically singular");
        return llt.solve(rhs);
    }

    std::vector<cmat> filters_;
    std::vector<cmat> R_est_;
    std::vector<cmat> R_err_;
    std::vector<std::vector<int>> copilot_sets_;
    rmat copilot_scale_;
};

inline EstimateSet lmmse_estimate(const std::vector<cvec> &y, const TrainingBasis &basis, const PilotBook &pilots,
                                  const rvec &beta, const TrainingNoise &noise)
{
    return LmmseEstimator(basis, pilots, beta, noise).estimate_all(y);
}

/// Perfect-CSI stand-in: the true channels with zero error covariance.
inline EstimateSet perfect_estimates(const std::vector<cvec> &h, const rvec &beta)
{
    EstimateSet out;
    const int K = int(h.size());
    out.estimates = h;
    out.copilot_scale = rmat::Identity(K, K);
    for (int k = 0; k < K; ++k)
    {
        const Eigen::Index n = h[k].size();
        out.R_est.push_back(beta(k) * cmat::Identity(n, n));
        out.R_err.push_back(cmat::Zero(n, n));
        out.copilot_sets.push_back({k});
    }
    return out;
}

} // namespace rismimo

#endif
