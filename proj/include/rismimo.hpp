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

#ifndef RISMIMO_RISMIMO_HPP
#define RISMIMO_RISMIMO_HPP

#include "rismimo/core.hpp"
#include "rismimo/config.hpp"
#include "rismimo/ris_config.hpp"
#include "rismimo/geometry_channel.hpp"
#include "rismimo/metrics.hpp"
#include "rismimo/channel_estimation.hpp"
#include "rismimo/ris_optimizer.hpp"
#include "rismimo/power_control.hpp"
#include "rismimo/spectral_efficiency.hpp"
#include "rismimo/sim_harness.hpp"

#endif
