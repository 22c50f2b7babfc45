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

#ifndef RISMIMO_METRICS_HPP
#define RISMIMO_METRICS_HPP

#include "rismimo/core.hpp"

#include <Eigen/Eigenvalues>

namespace rismimo
{

// Favourable-propagation / channel-hardening diagnostics of the composite channel
// H P h with h ~ CN(0, beta I).

struct FpHardeningReport
{
    rmat f_cross;              // K x K; off-diagonal entries are f_{k,j}
    rvec f_self;               // f_{k,k}
    double closed_form_value = 0.0;
    double lower_bound = 0.0;  // 1 / N_A
    long n_trials = 0;
};

/// sum(l^2) / (sum l)^2 over the eigenvalues of the Gram matrix H P P^H H^H, which
/// carries the nonzero spectrum of P^H H^H H P.
inline double fp_hardening_closed(const cmat &H, const cvec &ris_diagonal)
{
    require_dims(H.cols() == ris_diagonal.size(), "fp_hardening_closed: H and P disagree");
    const cmat HP = H * ris_diagonal.asDiagonal();
    const cmat gram = HP * HP.adjoint();
    Eigen::SelfAdjointEigenSolver<cmat> eig(gram, Eigen::EigenvaluesOnly);
    const rvec lambda = eig.eigenvalues().cwiseMax(0.0);
    const double s1 = lambda.sum();
    if (!(s1 > 0.0))
        throw degenerate_channel("fp_hardening_closed: H P is identically zero");
    return lambda.squaredNorm() / (s1 * s1);
}

/// Monte Carlo estimate over i.i.d. Rayleigh draws for `ue_count` users. The
/// normalisations use sample means, so the estimate is independent of the
/// closed form.
inline FpHardeningReport fp_hardening_mc(const cmat &H, const cvec &ris_diagonal, int ue_count, long n_trials,
                                         rng_t &rng)
{
    require_dims(H.cols() == ris_diagonal.size(), "fp_hardening_mc: H and P disagree");
    if (n_trials < 2)
        throw invalid_config("fp_hardening_mc: need at least two trials");
    const int K = ue_count;
    const cmat HP = H * ris_diagonal.asDiagonal();

    // raw moment accumulators
    rvec norm_sum = rvec::Zero(K), norm_sq_sum = rvec::Zero(K);
    cmat inner_sum = cmat::Zero(K, K);
    rmat inner_sq_sum = rmat::Zero(K, K);

    cmat hbar(H.rows(), K);
    for (long t = 0; t < n_trials; ++t)
    {
        for (int k = 0; k < K; ++k)
            hbar.col(k) = HP * complex_normal_vector(rng, H.cols());
        const cmat gram = hbar.adjoint() * hbar;
        for (int k = 0; k < K; ++k)
        {
            const double e = gram(k, k).real();
            norm_sum(k) += e;
            norm_sq_sum(k) += e * e;
            for (int j = 0; j < K; ++j)
                if (j != k)
                {
                    inner_sum(k, j) += gram(k, j);
                    inner_sq_sum(k, j) += std::norm(gram(k, j));
                }
        }
    }

    const double n = double(n_trials);
    const rvec mean_norm = norm_sum / n;
    FpHardeningReport rep;
    rep.n_trials = n_trials;
    rep.lower_bound = 1.0 / double(H.rows());
    rep.closed_form_value = fp_hardening_closed(H, ris_diagonal);
    rep.f_self.resize(K);
    rep.f_cross = rmat::Zero(K, K);
    for (int k = 0; k < K; ++k)
    {
        const double var = (norm_sq_sum(k) - n * mean_norm(k) * mean_norm(k)) / (n - 1.0);
        rep.f_self(k) = var / (mean_norm(k) * mean_norm(k));
        rep.f_cross(k, k) = rep.f_self(k);
        for (int j = 0; j < K; ++j)
            if (j != k)
            {
                const cplx m = inner_sum(k, j) / n;
                const double var_kj = (inner_sq_sum(k, j) - n * std::norm(m)) / (n - 1.0);
                rep.f_cross(k, j) = var_kj / (mean_norm(k) * mean_norm(j));
            }
    }
    return rep;
}

} // namespace rismimo

#endif
