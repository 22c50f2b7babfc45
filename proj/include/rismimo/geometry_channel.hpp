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

#ifndef RISMIMO_GEOMETRY_CHANNEL_HPP
#define RISMIMO_GEOMETRY_CHANNEL_HPP

#include "rismimo/config.hpp"
#include "rismimo/core.hpp"
#include "rismimo/ris_config.hpp"

#include <sstream>
#include <vector>

namespace rismimo
{

// Layout: the RIS is a linear array along x centred at the origin, the active array
// is parallel to it at distance D (y = D), both mounted at the RIS height. Look
// angles are measured from the active-array broadside towards the RIS.
struct SystemGeometry
{
    std::vector<Eigen::Vector3d> active_positions; // N_A
    std::vector<Eigen::Vector3d> ris_positions;    // N_R
    double active_spacing = 0.0;                   // d_A
    double ris_spacing = 0.0;                      // d_R
    double array_ris_distance = 0.0;               // D
    double wavelength = 0.0;
    rmat look_angles; // N_A x N_R, radians
    rmat distances;   // N_A x N_R, meters

    int n_active() const { return int(active_positions.size()); }
    int n_ris() const { return int(ris_positions.size()); }
};

struct ChannelSet
{
    cmat H;             // N_A x N_R coupling, fixed for a geometry
    rvec beta;          // K large-scale gains, linear
    std::vector<cvec> h; // K UE-to-RIS channels, sqrt(beta_k) g_k
    std::vector<cvec> g; // K unit-variance small-scale factors

    int ue_count() const { return int(beta.size()); }
};

/// Spacing of the active elements so that every RIS element sits inside the main
/// lobe of at least one of them. Omnidirectional elements (alpha = pi) and a single
/// element use half a wavelength.
inline double active_array_spacing(int n_active, int n_ris, double ris_spacing, double distance, double alpha,
                                   double wavelength)
{
    if (alpha >= pi || n_active == 1)
        return 0.5 * wavelength;

    const double span = double(n_ris - 1) * ris_spacing;
    const double d_A = (span - 2.0 * distance * std::tan(alpha / 2.0)) / double(n_active - 1);
    if (d_A <= 0.0)
    {
        std::ostringstream msg;
        msg << "active-array spacing is non-positive (" << d_A << " m): with sector width " << alpha
            << " rad the array-RIS distance must be below " << span / (2.0 * std::tan(alpha / 2.0))
            << " m, or with distance " << distance << " m the sector must be narrower than "
            << 2.0 * std::atan(span / (2.0 * distance)) << " rad";
        throw non_positive_spacing(msg.str());
    }
    return d_A;
}

inline SystemGeometry build_geometry(const ScenarioConfig &config)
{
    validate(config);
    SystemGeometry geo;
    geo.wavelength = config.wavelength();
    geo.ris_spacing = config.spacing_dR();
    geo.array_ris_distance = config.distance_D();
    geo.active_spacing = active_array_spacing(config.n_active, config.n_ris, geo.ris_spacing,
                                              geo.array_ris_distance, config.sector_width, geo.wavelength);

    const int na = config.n_active;
    const int nr = config.n_ris;
    for (int j = 0; j < nr; ++j)
        geo.ris_positions.emplace_back((j - 0.5 * (nr - 1)) * geo.ris_spacing, 0.0, config.ris_height);
    for (int i = 0; i < na; ++i)
        geo.active_positions.emplace_back((i - 0.5 * (na - 1)) * geo.active_spacing, geo.array_ris_distance,
                                          config.ris_height);

    geo.look_angles.resize(na, nr);
    geo.distances.resize(na, nr);
    for (int i = 0; i < na; ++i)
        for (int j = 0; j < nr; ++j)
        {
            const Eigen::Vector3d delta = geo.ris_positions[j] - geo.active_positions[i];
            geo.distances(i, j) = delta.norm();
            geo.look_angles(i, j) = std::atan2(delta.x(), -delta.y());
        }
    return geo;
}

/// Sector antenna pattern: 2 pi / alpha inside [-alpha/2, alpha/2], zero outside (linear).
inline double active_gain(double theta, double alpha)
{
    return std::abs(theta) <= alpha / 2.0 ? 2.0 * pi / alpha : 0.0;
}

/// Deterministic RIS-to-array coupling. Entry (i, j) is the uplink coefficient from
/// RIS element j to active antenna i.
inline cmat build_coupling_matrix(const SystemGeometry &geo, const ScenarioConfig &config)
{
    const double lambda = geo.wavelength;
    cmat H(geo.n_active(), geo.n_ris());
    for (int i = 0; i < geo.n_active(); ++i)
        for (int j = 0; j < geo.n_ris(); ++j)
        {
            const double d = geo.distances(i, j);
            const double theta = geo.look_angles(i, j);
            const double amp = std::sqrt(config.ris_efficiency * active_gain(theta, config.sector_width) *
                                         config.ris_gain) *
                               lambda / (4.0 * pi * d);
            H(i, j) = std::polar(amp, -2.0 * pi * d / lambda);
        }
    return H;
}

// ------------------------------------------------------------------------
// Large-scale fading: log-distance urban-micro NLOS form.

inline double path_loss_db(double distance_3d, double carrier_frequency)
{
    return 35.3 * std::log10(distance_3d) + 22.4 + 21.3 * std::log10(carrier_frequency / 1e9);
}

/// Linear power gain for one link. Shadowing draws one normal sample from `rng`
/// only when enabled in the config.
inline double path_loss(double distance_3d, const ScenarioConfig &config, rng_t &rng)
{
    if (distance_3d <= 0.0)
        throw invalid_config("path_loss: distance must be positive");
    double pl = path_loss_db(distance_3d, config.carrier_frequency);
    if (config.shadowing)
    {
        std::normal_distribution<double> shadow(0.0, config.shadowing_std_db);
        pl += shadow(rng);
    }
    return db_to_linear(-pl);
}

struct UserPlacement
{
    rvec azimuth;             // radians
    rvec horizontal_distance; // meters from the RIS foot point
    rvec distance_3d;         // meters to the RIS centre
};

inline UserPlacement place_users(const ScenarioConfig &config, rng_t &rng)
{
    UserPlacement u;
    const int K = config.ue_count;
    u.azimuth.resize(K);
    u.horizontal_distance.resize(K);
    u.distance_3d.resize(K);
    const double dz = config.ris_height - config.ue_height;
    for (int k = 0; k < K; ++k)
    {
        u.azimuth(k) = uniform(rng, -config.ue_sector_half_width, config.ue_sector_half_width);
        u.horizontal_distance(k) = uniform(rng, config.ue_min_distance, config.ue_max_distance);
        u.distance_3d(k) = std::hypot(u.horizontal_distance(k), dz);
    }
    return u;
}

inline rvec large_scale_gains(const UserPlacement &users, const ScenarioConfig &config, rng_t &rng)
{
    rvec beta(users.distance_3d.size());
    for (Eigen::Index k = 0; k < beta.size(); ++k)
        beta(k) = path_loss(users.distance_3d(k), config, rng);
    return beta;
}

/// Rayleigh UE-to-RIS channels around a fixed coupling matrix.
inline ChannelSet draw_channels(const cmat &H, const rvec &beta, rng_t &rng)
{
    ChannelSet set;
    set.H = H;
    set.beta = beta;
    const Eigen::Index n = H.cols();
    for (Eigen::Index k = 0; k < beta.size(); ++k)
    {
        set.g.push_back(complex_normal_vector(rng, n));
        set.h.push_back(std::sqrt(beta(k)) * set.g.back());
    }
    return set;
}

/// H P h_k for a diagonal P given by its diagonal.
inline cvec composite_channel(const cmat &H, const cvec &ris_diagonal, const cvec &h)
{
    require_dims(H.cols() == ris_diagonal.size() && ris_diagonal.size() == h.size(),
                 "composite_channel: H, P and h dimensions disagree");
    return H * ris_diagonal.cwiseProduct(h);
}

inline cvec composite_channel(const cmat &H, const RisConfig &P, const cvec &h)
{
    return composite_channel(H, P.diagonal(), h);
}

} // namespace rismimo

#endif
