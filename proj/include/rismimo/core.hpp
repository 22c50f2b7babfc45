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

#ifndef RISMIMO_CORE_HPP
#define RISMIMO_CORE_HPP

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace rismimo
{

using cplx = std::complex<double>;
using cvec = Eigen::VectorXcd;
using cmat = Eigen::MatrixXcd;
using rvec = Eigen::VectorXd;
using rmat = Eigen::MatrixXd;

inline constexpr double pi = std::numbers::pi;
inline constexpr double speed_of_light = 299792458.0;

// ------------------------------------------------------------------------
// Errors. Every failure raised by the library derives from rismimo::error so
// callers can catch the family; the concrete type names the condition.

class error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

#define RISMIMO_DEFINE_ERROR(name)          \
    class name : public error               \
    {                                       \
    public:                                 \
        using error::error;                 \
    }

RISMIMO_DEFINE_ERROR(invalid_config);
RISMIMO_DEFINE_ERROR(non_positive_spacing);
RISMIMO_DEFINE_ERROR(dimension_mismatch);
RISMIMO_DEFINE_ERROR(degenerate_channel);
RISMIMO_DEFINE_ERROR(rank_deficient);
RISMIMO_DEFINE_ERROR(singular_covariance);
RISMIMO_DEFINE_ERROR(zero_estimate);
RISMIMO_DEFINE_ERROR(ill_posed);
RISMIMO_DEFINE_ERROR(infeasible);
RISMIMO_DEFINE_ERROR(io_error);

#undef RISMIMO_DEFINE_ERROR

inline void require_dims(bool ok, const std::string &what)
{
    if (!ok)
        throw dimension_mismatch(what);
}

// ------------------------------------------------------------------------
// Unit helpers

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

// ------------------------------------------------------------------------
// Random streams
//
// A stream is identified by a root seed plus a path of integer tags (drop index,
// purpose, realization, ...). Identical paths give identical streams regardless of
// the order or thread in which they are created.

using rng_t = std::mt19937_64;

inline rng_t make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path = {})
{
    std::vector<std::uint32_t> words;
    words.reserve(2 + 2 * path.size());
    words.push_back(static_cast<std::uint32_t>(seed & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(seed >> 32));
    for (auto tag : path)
    {
        words.push_back(static_cast<std::uint32_t>(tag & 0xffffffffu));
        words.push_back(static_cast<std::uint32_t>(tag >> 32));
    }
    std::seed_seq seq(words.begin(), words.end());
    std::uint32_t state[2];
    seq.generate(state, state + 2);
    return rng_t((static_cast<std::uint64_t>(state[1]) << 32) | state[0]);
}

/// One CN(0, variance) sample.
inline cplx complex_normal(rng_t &rng, double variance = 1.0)
{
    std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
    const double re = n(rng);
    const double im = n(rng);
    return {re, im};
}

inline cvec complex_normal_vector(rng_t &rng, Eigen::Index n, double variance = 1.0)
{
    cvec v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v(i) = complex_normal(rng, variance);
    return v;
}

inline cmat complex_normal_matrix(rng_t &rng, Eigen::Index rows, Eigen::Index cols, double variance = 1.0)
{
    cmat m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r)
            m(r, c) = complex_normal(rng, variance);
    return m;
}

inline double uniform(rng_t &rng, double lo, double hi)
{
    std::uniform_real_distribution<double> u(lo, hi);
    return u(rng);
}

/// Unit-modulus vector with i.i.d. uniform phases.
inline cvec random_phases(rng_t &rng, Eigen::Index n)
{
    cvec v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v(i) = std::polar(1.0, uniform(rng, -pi, pi));
    return v;
}

inline double relative_error(double value, double reference)
{
    return std::abs(value - reference) / std::abs(reference);
}

} // namespace rismimo

#endif
