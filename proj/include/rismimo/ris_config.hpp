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

#ifndef RISMIMO_RIS_CONFIG_HPP
#define RISMIMO_RIS_CONFIG_HPP

#include "rismimo/config.hpp"
#include "rismimo/core.hpp"

#include <optional>

namespace rismimo
{

/// Diagonal RIS response.
///
/// Passive: `coefficients` has unit-modulus entries and is the diagonal itself.
/// Active: `coefficients` is the unit-norm direction and the diagonal is
/// sqrt(omega_ris) * coefficients.
struct RisConfig
{
    cvec coefficients;
    RisMode mode = RisMode::passive;
    double omega_ris = 1.0;
    std::optional<int> phase_bits;

    Eigen::Index size() const { return coefficients.size(); }

    cvec diagonal() const
    {
        if (mode == RisMode::passive)
            return coefficients;
        return std::sqrt(omega_ris) * coefficients;
    }

    static RisConfig passive(cvec phases, std::optional<int> bits = std::nullopt)
    {
        return RisConfig{std::move(phases), RisMode::passive, 1.0, bits};
    }

    static RisConfig active(cvec direction, double omega, std::optional<int> bits = std::nullopt)
    {
        return RisConfig{std::move(direction), RisMode::active, omega, bits};
    }

    static RisConfig identity(Eigen::Index n) { return passive(cvec::Ones(n)); }
};

} // namespace rismimo

#endif
