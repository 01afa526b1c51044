// Copyright 2026 The crowdmpc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "crowdmpc/batch.hpp"
#include "crowdmpc/box_solver.hpp"
#include "crowdmpc/dynamics.hpp"
#include "crowdmpc/error.hpp"
#include "crowdmpc/ibr.hpp"
#include "crowdmpc/lstm_weights.hpp"
#include "crowdmpc/manifest.hpp"
#include "crowdmpc/metrics.hpp"
#include "crowdmpc/mpc.hpp"
#include "crowdmpc/orca.hpp"
#include "crowdmpc/predictor.hpp"
#include "crowdmpc/scenario.hpp"
#include "crowdmpc/simulation.hpp"
#include "crowdmpc/svg.hpp"
#include "crowdmpc/trajectory_log.hpp"
#include "crowdmpc/vec2.hpp"
