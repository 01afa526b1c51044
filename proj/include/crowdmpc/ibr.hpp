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

// Iterative best response between the pedestrian predictor and the MPC:
// predict the crowd given the robot's current plan, re-plan given that
// prediction, and repeat until the plan stops moving.

#include <cstddef>
#include <limits>

#include "crowdmpc/dynamics.hpp"
#include "crowdmpc/mpc.hpp"
#include "crowdmpc/predictor.hpp"

namespace crowdmpc {

struct IbrParams {
  int j_max{5};
  /// Threshold on the Euclidean norm of the change of the flattened plan.
  double epsilon{1e-2};
};

struct IbrResult {
  ControlAction action;
  ControlPlan plan;  // final plan; shift it to warm-start the next step
  int iterations{0};
  bool converged{false};
  PredictedTrajectories predictions;  // used for the final solve
};

inline ControlPlan initialize_warm_start(std::size_t horizon) { return ControlPlan::zeros(horizon); }

/// Drops the executed action and repeats the last one.
inline ControlPlan shift_warm_start(const ControlPlan& previous) {
  if (previous.size() == 0) return previous;
  ControlPlan out;
  out.actions.assign(previous.actions.begin() + 1, previous.actions.end());
  out.actions.push_back(previous.actions.back());
  return out;
}

inline IbrResult solve_timestep(const WorldHistory& history, const RobotState& robot, const Vec2& goal,
                                const ControlAction& u_prev, const ControlPlan& warm, const PredictorKind& predictor,
                                const MpcParams& mpc, const IbrParams& ibr) {
  if (warm.size() != mpc.horizon) throw DimensionError("solve_timestep: warm start length differs from H");
  const ReferencePath reference = reference_trajectory(robot.position, goal, mpc.horizon, mpc.tau, mpc.v_max);

  IbrResult out;
  ControlPlan plan = warm;
  auto robot_positions = positions_of(rollout(robot, plan, mpc.tau));
  for (int j = 1; j <= ibr.j_max; ++j) {
    out.predictions = rollout_predictions(predictor, history, robot_positions);
    MpcSolution sol = solve_mpc(robot, u_prev, reference, out.predictions, mpc, plan);
    const double change = plan_distance(sol.plan, plan);
    out.iterations = j;
    plan = std::move(sol.plan);
    robot_positions = positions_of(sol.states);
    if (change <= ibr.epsilon) {
      out.converged = true;
      break;
    }
  }
  out.action = plan[0];
  out.plan = std::move(plan);
  return out;
}

}  // namespace crowdmpc
