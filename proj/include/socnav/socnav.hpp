// Copyright 2026 The socnav Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Umbrella header for the socially-aware navigation toolkit.

#ifndef SOCNAV_SOCNAV_HPP_
#define SOCNAV_SOCNAV_HPP_

#include "socnav/benchmark.hpp"
#include "socnav/common.hpp"
#include "socnav/config.hpp"
#include "socnav/grid.hpp"
#include "socnav/grpo.hpp"
#include "socnav/json_io.hpp"
#include "socnav/metrics.hpp"
#include "socnav/pedestrians.hpp"
#include "socnav/planner.hpp"
#include "socnav/policy.hpp"
#include "socnav/rewards.hpp"
#include "socnav/rng.hpp"
#include "socnav/trajectory.hpp"

#endif  // SOCNAV_SOCNAV_HPP_
