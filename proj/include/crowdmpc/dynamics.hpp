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

// Robot point-mass model: discrete double integrator, plan rollout and the
// straight-line reference the tracking cost follows.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "crowdmpc/error.hpp"
#include "crowdmpc/vec2.hpp"

namespace crowdmpc {

struct RobotState {
  Vec2 position;  // m
  Vec2 velocity;  // m/s

  friend bool operator==(const RobotState&, const RobotState&) = default;
};

struct ControlAction {
  Vec2 accel;  // m/s^2

  friend bool operator==(const ControlAction&, const ControlAction&) = default;
};

/// H accelerations, one per step of the control horizon.
struct ControlPlan {
  std::vector<ControlAction> actions;

  std::size_t size() const { return actions.size(); }
  const ControlAction& operator[](std::size_t k) const { return actions[k]; }
  ControlAction& operator[](std::size_t k) { return actions[k]; }

  static ControlPlan zeros(std::size_t horizon) {
    return ControlPlan{std::vector<ControlAction>(horizon)};
  }

  /// Flattened [a0x, a0y, a1x, a1y, ...].
  std::vector<double> flatten() const {
    std::vector<double> out;
    out.reserve(2 * actions.size());
    for (const auto& a : actions) {
      out.push_back(a.accel.x);
      out.push_back(a.accel.y);
    }
    return out;
  }

  static ControlPlan unflatten(const std::vector<double>& flat) {
    ControlPlan plan;
    plan.actions.resize(flat.size() / 2);
    for (std::size_t k = 0; k < plan.actions.size(); ++k) {
      plan.actions[k].accel = {flat[2 * k], flat[2 * k + 1]};
    }
    return plan;
  }

  friend bool operator==(const ControlPlan&, const ControlPlan&) = default;
};

inline bool within_box(const ControlAction& a, double a_max) {
  return std::abs(a.accel.x) <= a_max && std::abs(a.accel.y) <= a_max;
}

inline bool within_box(const ControlPlan& plan, double a_max) {
  return std::all_of(plan.actions.begin(), plan.actions.end(),
                     [a_max](const ControlAction& a) { return within_box(a, a_max); });
}

/// Euclidean norm of the flattened difference of two equal-length plans.
inline double plan_distance(const ControlPlan& a, const ControlPlan& b) {
  if (a.size() != b.size()) throw DimensionError("plan_distance: plan lengths differ");
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) sum += norm_sq(a[k].accel - b[k].accel);
  return std::sqrt(sum);
}

struct ReferencePath {
  std::vector<Vec2> points;
};

inline RobotState step_dynamics(const RobotState& state, const ControlAction& action, double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidStateError("step_dynamics: tau must be positive");
  if (!is_finite(state.position) || !is_finite(state.velocity) || !is_finite(action.accel)) {
    throw InvalidStateError("step_dynamics: non-finite state or action");
  }
  RobotState next;
  next.position = state.position + tau * state.velocity + (0.5 * tau * tau) * action.accel;
  next.velocity = state.velocity + tau * action.accel;
  return next;
}

/// Element k is the state after applying actions 0..k.
inline std::vector<RobotState> rollout(const RobotState& initial, const ControlPlan& plan, double tau) {
  std::vector<RobotState> states;
  states.reserve(plan.size());
  RobotState s = initial;
  for (const auto& a : plan.actions) {
    s = step_dynamics(s, a, tau);
    states.push_back(s);
  }
  return states;
}

inline std::vector<Vec2> positions_of(const std::vector<RobotState>& states) {
  std::vector<Vec2> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(s.position);
  return out;
}

/// Straight-line reference toward the goal, advancing at most tau*v_max per
/// step and saturating exactly at the goal. The direction is fixed from
/// `start` for the whole horizon.
inline ReferencePath reference_trajectory(const Vec2& start, const Vec2& goal, std::size_t horizon,
                                          double tau, double v_max) {
  if (horizon < 1) throw DimensionError("reference_trajectory: horizon must be >= 1");
  ReferencePath path;
  path.points.reserve(horizon);
  const Vec2 offset = goal - start;
  const double total = norm(offset);
  if (total == 0.0) {
    path.points.assign(horizon, goal);
    return path;
  }
  const Vec2 direction = offset / total;
  const double max_step = tau * v_max;
  Vec2 current = start;
  bool arrived = false;
  for (std::size_t k = 0; k < horizon; ++k) {
    if (!arrived) {
      const double remaining = norm(goal - current);
      if (max_step >= remaining) {
        current = goal;
        arrived = true;
      } else {
        current = current + max_step * direction;
      }
    }
    path.points.push_back(current);
  }
  return path;
}

}  // namespace crowdmpc
