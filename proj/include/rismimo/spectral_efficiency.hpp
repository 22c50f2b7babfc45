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

#ifndef RISMIMO_SPECTRAL_EFFICIENCY_HPP
#define RISMIMO_SPECTRAL_EFFICIENCY_HPP

#include "rismimo/channel_estimation.hpp"
#include "rismimo/core.hpp"
#include "rismimo/power_control.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace rismimo
{

// Conventions: hbar_k = H P h_k is the composite channel, the received downlink
// amplitude of stream j at UE k is hbar_k^T w_j, and conjugate beamforming uses
// w_k = conj(H P hhat_k), optionally normalised.

struct Precoders
{
    cmat W; // N_A x K, column k is w_k
    bool normalized = true;

    int ue_count() const { return int(W.cols()); }
    rvec norms_sq() const { return W.colwise().squaredNorm().transpose(); }
};

inline Precoders make_precoders(const cmat &H, const cvec &ris_diagonal, const std::vector<cvec> &estimates,
                                bool normalized = true)
{
    Precoders p;
    p.normalized = normalized;
    p.W.resize(H.rows(), Eigen::Index(estimates.size()));
    for (std::size_t k = 0; k < estimates.size(); ++k)
    {
        const cvec hb = composite_channel(H, ris_diagonal, estimates[k]);
        const double n = hb.norm();
        if (normalized)
        {
            if (!(n > 0.0))
                throw zero_estimate("make_precoders: composite estimate of UE " + std::to_string(k) + " is zero");
            p.W.col(Eigen::Index(k)) = hb.conjugate() / n;
        }
        else
            p.W.col(Eigen::Index(k)) = hb.conjugate();
    }
    return p;
}

/// G(k, j) = hbar_k^T w_j.
inline cmat downlink_gains(const cmat &H, const cvec &ris_diagonal, const std::vector<cvec> &h, const cmat &W)
{
    cmat hb(H.rows(), Eigen::Index(h.size()));
    for (std::size_t k = 0; k < h.size(); ++k)
        hb.col(Eigen::Index(k)) = composite_channel(H, ris_diagonal, h[k]);
    return hb.transpose() * W;
}

/// |h_k^T P|^2 per UE, the gain the RIS amplifier noise sees.
inline rvec ris_noise_gains(const cvec &ris_diagonal, const std::vector<cvec> &h)
{
    rvec g(Eigen::Index(h.size()));
    for (std::size_t k = 0; k < h.size(); ++k)
        g(Eigen::Index(k)) = ris_diagonal.cwiseProduct(h[k]).squaredNorm();
    return g;
}

struct DownlinkNoise
{
    rvec ue_noise;          // sigma_k^2
    double ris_noise = 0.0; // sigma_R^2
    int delta = 0;

    static DownlinkNoise from(const ScenarioConfig &c)
    {
        return {rvec::Constant(c.ue_count, c.noise_power()), c.ris_noise_power(), c.delta()};
    }
};

/// Perfect-CSI coefficients for fixed precoders.
inline SinrCoefficients extract_coefficients_pcsi(const cmat &H, const cvec &ris_diagonal,
                                                  const std::vector<cvec> &h, const Precoders &w,
                                                  const DownlinkNoise &noise, double budget)
{
    const int K = int(h.size());
    require_dims(w.ue_count() == K && noise.ue_noise.size() == K, "extract_coefficients_pcsi: UE counts disagree");
    const cmat G = downlink_gains(H, ris_diagonal, h, w.W);
    SinrCoefficients s;
    s.a = G.diagonal().cwiseAbs2();
    s.b.resize(K, K);
    for (int j = 0; j < K; ++j)
        for (int k = 0; k < K; ++k)
            s.b(j, k) = j == k ? 0.0 : std::norm(G(k, j));
    s.c = double(noise.delta) * noise.ris_noise * ris_noise_gains(ris_diagonal, h);
    s.delta = noise.delta;
    s.noise = noise.ue_noise;
    s.precoder_norms = w.norms_sq();
    s.budget = budget;
    return s;
}

/// Instantaneous SINR with perfect CSI at the receivers.
inline rvec sinr_perfect_csi(const cmat &H, const cvec &ris_diagonal, const std::vector<cvec> &h, const Precoders &w,
                             const rvec &eta, const DownlinkNoise &noise)
{
    const int K = int(h.size());
    require_dims(eta.size() == K, "sinr_perfect_csi: power vector length differs from K");
    const cmat G = downlink_gains(H, ris_diagonal, h, w.W);
    const rvec zg = ris_noise_gains(ris_diagonal, h);
    rvec out(K);
    for (int k = 0; k < K; ++k)
    {
        double interference = 0.0;
        for (int j = 0; j < K; ++j)
            if (j != k)
                interference += eta(j) * std::norm(G(k, j));
        out(k) = eta(k) * std::norm(G(k, k)) /
                 (interference + double(noise.delta) * zg(k) * noise.ris_noise + noise.ue_noise(k));
    }
    return out;
}

// ------------------------------------------------------------------------
// SE reports

struct SEReport
{
    rvec sinr;
    rvec se;
    std::string mode; // "PCSI", "UB", "LB-MC", "LB-CF"
    double prelog = 1.0;
    rvec std_error;   // Monte Carlo standard error of se, when averaged
};

inline rvec se_from_sinr(const rvec &sinr, double prelog)
{
    return prelog * sinr.unaryExpr([](double g) { return std::log2(1.0 + g); });
}

inline SEReport se_perfect(const rvec &sinr, double prelog)
{
    return {sinr, se_from_sinr(sinr, prelog), "PCSI", prelog, rvec::Zero(sinr.size())};
}

/// Mean of prelog log2(1 + gamma) over per-realization SINR samples.
class SeAverager
{
public:
    void add(const rvec &sinr)
    {
        const rvec r = sinr.unaryExpr([](double g) { return std::log2(1.0 + g); });
        if (n_ == 0)
        {
            sum_ = rvec::Zero(r.size());
            sq_ = rvec::Zero(r.size());
            sinr_sum_ = rvec::Zero(r.size());
        }
        sum_ += r;
        sq_ += r.cwiseAbs2();
        sinr_sum_ += sinr;
        ++n_;
    }

    long count() const { return n_; }

    SEReport report(double prelog, const std::string &mode = "UB") const
    {
        if (n_ == 0)
            throw invalid_config("SeAverager: no samples");
        const double n = double(n_);
        const rvec mean = sum_ / n;
        rvec se_err = rvec::Zero(mean.size());
        if (n_ > 1)
            se_err = ((sq_ / n - mean.cwiseAbs2()).cwiseMax(0.0) * (n / (n - 1.0)) / n).cwiseSqrt() * prelog;
        return {sinr_sum_ / n, prelog * mean, mode, prelog, se_err};
    }

private:
    rvec sum_, sq_, sinr_sum_;
    long n_ = 0;
};

// ------------------------------------------------------------------------
// Hardening bound

struct HardeningTerms
{
    cvec ds;             // DS_k = E[hbar_k^T w_k]
    rvec bu;             // E|BU_k|^2
    rmat ui;             // ui(k, j) = E|hbar_k^T w_j|^2, j != k; diagonal unused (zero)
    rvec dyn_noise;      // E|z~_k|^2, sigma_R^2 included
    rvec precoder_norms; // E|w_k|^2
    cmat P_bar;          // P H^T H^* P^*, empty for Monte Carlo terms with varying P
    long n_trials = 0;

    int ue_count() const { return int(ds.size()); }
};

/// Accumulates one realization at a time. Works for any precoder and any RIS
/// policy, including configurations re-optimised per realization.
class HardeningAccumulator
{
public:
    explicit HardeningAccumulator(int K)
        : K_(K), ds_(cvec::Zero(K)), sq_(rvec::Zero(K)), ui_(rmat::Zero(K, K)), z_(rvec::Zero(K)),
          wn_(rvec::Zero(K))
    {
    }

    /// gains(k, j) = hbar_k^T w_j; zeta(k) = |h_k^T P|^2 sigma_R^2.
    void add(const cmat &gains, const rvec &zeta, const rvec &precoder_norms)
    {
        require_dims(gains.rows() == K_ && gains.cols() == K_ && zeta.size() == K_,
                     "HardeningAccumulator: dimension mismatch");
        for (int k = 0; k < K_; ++k)
        {
            ds_(k) += gains(k, k);
            sq_(k) += std::norm(gains(k, k));
            for (int j = 0; j < K_; ++j)
                if (j != k)
                    ui_(k, j) += std::norm(gains(k, j));
        }
        z_ += zeta;
        wn_ += precoder_norms;
        ++n_;
    }

    long count() const { return n_; }

    HardeningTerms terms() const
    {
        if (n_ < 2)
            throw invalid_config("HardeningAccumulator: need at least two realizations");
        const double n = double(n_);
        HardeningTerms t;
        t.ds = ds_ / n;
        // sample variance of hbar_k^T w_k
        t.bu = ((sq_ - n * t.ds.cwiseAbs2()) / (n - 1.0)).cwiseMax(0.0);
        t.ui = ui_ / n;
        t.dyn_noise = z_ / n;
        t.precoder_norms = wn_ / n;
        t.n_trials = n_;
        return t;
    }

private:
    int K_;
    cvec ds_;
    rvec sq_;
    rmat ui_;
    rvec z_, wn_;
    long n_ = 0;
};

/// Setup for Monte Carlo hardening terms with a channel-independent RIS.
struct HardeningSetup
{
    cmat H;
    cvec ris_diagonal;  // downlink P
    rvec beta;
    TrainingBasis basis;
    PilotBook pilots;
    TrainingNoise training_noise;
    double ris_noise = 0.0; // downlink sigma_R^2
    int delta = 0;
    bool normalized = true;
    bool perfect_csi = false;
};

/// Draws fading, simulates training and LMMSE estimation, and averages the
/// per-realization downlink gains.
inline HardeningTerms hardening_terms_mc(const HardeningSetup &s, long n_trials, rng_t &rng)
{
    const int K = int(s.beta.size());
    const LmmseEstimator est(s.basis, s.pilots, s.beta, s.training_noise);
    HardeningAccumulator acc(K);
    for (long t = 0; t < n_trials; ++t)
    {
        const ChannelSet ch = draw_channels(s.H, s.beta, rng);
        std::vector<cvec> hhat;
        if (s.perfect_csi)
            hhat = ch.h;
        else
            hhat = est.estimate_all(simulate_training(ch.h, s.basis, s.pilots, s.training_noise, rng)).estimates;
        const Precoders w = make_precoders(s.H, s.ris_diagonal, hhat, s.normalized);
        const cmat G = downlink_gains(s.H, s.ris_diagonal, ch.h, w.W);
        const rvec zeta = double(s.delta) * s.ris_noise * ris_noise_gains(s.ris_diagonal, ch.h);
        acc.add(G, zeta, w.norms_sq());
    }
    return acc.terms();
}

/// P_bar = P H^T H^* P^*.
inline cmat make_P_bar(const cmat &H, const cvec &ris_diagonal)
{
    const cmat HP = H * ris_diagonal.asDiagonal();
    return HP.transpose() * HP.conjugate();
}

/// Closed-form terms for unnormalised conjugate beamforming, a channel-independent
/// RIS and i.i.d. Rayleigh h_k (R_hh = beta_k I).
inline HardeningTerms hardening_closed_form(const cmat &H, const cvec &ris_diagonal, const rvec &beta,
                                            const EstimateSet &est, double ris_noise, int delta)
{
    const int K = int(beta.size());
    require_dims(int(est.R_est.size()) == K, "hardening_closed_form: covariance count differs from K");
    HardeningTerms t;
    t.P_bar = make_P_bar(H, ris_diagonal);
    const cmat &Pb = t.P_bar;
    const cmat HP = H * ris_diagonal.asDiagonal();

    t.ds.resize(K);
    t.bu.resize(K);
    t.ui = rmat::Zero(K, K);
    t.dyn_noise.resize(K);
    t.precoder_norms.resize(K);

    // tr(P_bar R_j^* P_bar^H) for every j
    rvec spread(K);
    for (int j = 0; j < K; ++j)
    {
        const cmat Rc = est.R_est[j].conjugate();
        t.ds(j) = (Pb * Rc).trace();
        spread(j) = (Pb * Rc * Pb.adjoint()).trace().real();
        t.precoder_norms(j) = (HP * est.R_est[j] * HP.adjoint()).trace().real();
    }
    const double p_energy = ris_diagonal.squaredNorm();
    for (int k = 0; k < K; ++k)
    {
        t.bu(k) = beta(k) * spread(k);
        t.dyn_noise(k) = double(delta) * ris_noise * beta(k) * p_energy;
        const auto &cop = est.copilot_sets[k];
        for (int j = 0; j < K; ++j)
        {
            if (j == k)
                continue;
            if (std::find(cop.begin(), cop.end(), j) != cop.end())
            {
                const double c = est.copilot_scale(j, k); // hhat_j = c hhat_k
                t.ui(k, j) = c * c * (std::norm(t.ds(k)) + beta(k) * spread(k));
            }
            else
                t.ui(k, j) = beta(k) * spread(j);
        }
    }
    return t;
}

/// Coefficients of the hardening-bound SINR.
inline SinrCoefficients extract_coefficients_lb(const HardeningTerms &t, const DownlinkNoise &noise, double budget)
{
    const int K = t.ue_count();
    SinrCoefficients s;
    s.a = t.ds.cwiseAbs2();
    s.b.resize(K, K);
    for (int j = 0; j < K; ++j)
        for (int k = 0; k < K; ++k)
            s.b(j, k) = j == k ? t.bu(k) : t.ui(k, j);
    // dyn_noise already carries delta; keep c so that delta c reproduces it
    s.c = t.dyn_noise;
    s.delta = noise.delta;
    s.noise = noise.ue_noise;
    s.precoder_norms = t.precoder_norms;
    s.budget = budget;
    return s;
}

inline rvec sinr_lower_bound(const HardeningTerms &t, const rvec &eta, const DownlinkNoise &noise)
{
    return sinr_from_coefficients(extract_coefficients_lb(t, noise, 1.0), eta);
}

/// The closed-form SINR written out directly, one UE at a time.
inline rvec sinr_lower_bound_closed_form(const cmat &H, const cvec &ris_diagonal, const rvec &beta,
                                         const EstimateSet &est, const rvec &eta, const DownlinkNoise &noise)
{
    const int K = int(beta.size());
    const cmat Pb = make_P_bar(H, ris_diagonal);
    rvec out(K);
    for (int k = 0; k < K; ++k)
    {
        const cmat Rk = est.R_est[k].conjugate();
        const double coherent = std::norm((Pb * Rk).trace());
        double denom = noise.ue_noise(k);
        for (int j : est.copilot_sets[k])
            if (j != k)
            {
                const double c = est.copilot_scale(j, k);
                denom += eta(j) * c * c * coherent;
            }
        const cmat Rh = beta(k) * cmat::Identity(H.cols(), H.cols());
        for (int j = 0; j < K; ++j)
            denom += eta(j) * (Rh * Pb * est.R_est[j].conjugate() * Pb.adjoint()).trace().real();
        denom += double(noise.delta) * noise.ris_noise *
                 (Rh * ris_diagonal.asDiagonal() * ris_diagonal.conjugate().asDiagonal()).trace().real();
        out(k) = eta(k) * coherent / denom;
    }
    return out;
}

} // namespace rismimo

#endif
