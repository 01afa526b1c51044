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

// Closed-loop crowd simulation: the robot is driven by the best-response
// MPC, pedestrians by ORCA, both advanced synchronously every tau seconds.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "crowdmpc/dynamics.hpp"
#include "crowdmpc/ibr.hpp"
#include "crowdmpc/mpc.hpp"
#include "crowdmpc/orca.hpp"
#include "crowdmpc/predictor.hpp"
#include "crowdmpc/scenario.hpp"
#include "crowdmpc/trajectory_log.hpp"
#include "crowdmpc/vec2.hpp"

namespace crowdmpc {

enum class SimStatus { Success, Collision, Timeout };

inline const char* to_string(SimStatus s) {
  switch (s) {
    case SimStatus::Success:
      return "success";
    case SimStatus::Collision:
      return "collision";
    case SimStatus::Timeout:
      return "timeout";
  }
  return "?";
}

struct SimOutcome {
  SimStatus status{SimStatus::Timeout};
  double travel_time{0.0};  // s
  double min_separation{std::numeric_limits<double>::infinity()};  // m; inf without pedestrians
  int discomfort_steps{0};
  std::vector<double> step_compute_times;  // s, one per solve_timestep call
  int ibr_steps{0};
  int ibr_converged_steps{0};
};

struct SimResult {
  SimOutcome outcome;
  TrajectoryLog log;
};

/// True iff segment [a, a + da] intersects [b, b + db]. Degenerate
/// (zero-length) segments never intersect.
inline bool segments_intersect(const Vec2& a, const Vec2& da, const Vec2& b, const Vec2& db) {
  if (norm_sq(da) == 0.0 || norm_sq(db) == 0.0) return false;
  const Vec2 a2 = a + da;
  const Vec2 b2 = b + db;
  auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) { return det(q - p, r - p); };
  auto sign = [](double v) { return (v > 0.0) - (v < 0.0); };
  auto on_segment = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    return std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) && std::min(p.y, q.y) <= r.y &&
           r.y <= std::max(p.y, q.y);
  };
  const int o1 = sign(orient(a, a2, b));
  const int o2 = sign(orient(a, a2, b2));
  const int o3 = sign(orient(b, b2, a));
  const int o4 = sign(orient(b, b2, a2));
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a, a2, b)) return true;
  if (o2 == 0 && on_segment(a, a2, b2)) return true;
  if (o3 == 0 && on_segment(b, b2, a)) return true;
  if (o4 == 0 && on_segment(b, b2, a2)) return true;
  return false;
}

/// Robot's projected path [s, s + kappa v] crosses the pedestrian's.
inline bool discomfort_check(const RobotState& robot, const Vec2& ped_position, const Vec2& ped_velocity,
                             double kappa = 1.0) {
  return segments_intersect(robot.position, kappa * robot.velocity, ped_position, kappa * ped_velocity);
}

namespace detail {

inline Vec2 preferred_velocity(const Vec2& position, const Vec2& goal, double speed, double tau) {
  // Aim to land exactly on the goal rather than overshoot it.
  const Vec2 to_goal = (goal - position) / tau;
  const double n = norm(to_goal);
  return n > speed ? to_goal * (speed / n) : to_goal;
}

}  // namespace detail

/// Pedestrians closer to their goal than this stop and stay put.
inline constexpr double kArrivalTolerance = 1e-3;

/// ORCA velocities for every pedestrian, all computed from the same
/// snapshot. Arrived pedestrians keep zero velocity and act as static,
/// non-reciprocating neighbours. `robot` may be null.
inline std::vector<Vec2> crowd_velocities(const std::vector<Vec2>& positions, const std::vector<Vec2>& velocities,
                                          const std::vector<Vec2>& goals, const std::vector<char>& arrived,
                                          const ScenarioConfig& config, const OrcaAgent* robot, double tau) {
  const std::size_t n = positions.size();
  std::vector<OrcaAgent> agents(n);
  for (std::size_t i = 0; i < n; ++i) {
    OrcaAgent& a = agents[i];
    a.position = positions[i];
    a.velocity = velocities[i];
    a.radius = config.human_radius + config.orca_margin;
    a.max_speed = config.human_pref_speed;
    a.time_horizon = config.human_time_horizon;
    a.reciprocal = !arrived[i];
    a.pref_velocity =
        arrived[i] ? Vec2{} : detail::preferred_velocity(positions[i], goals[i], config.human_pref_speed, tau);
  }
  std::vector<Vec2> out(n);
  std::vector<OrcaAgent> neighbors;
  for (std::size_t i = 0; i < n; ++i) {
    if (arrived[i]) continue;
    neighbors.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && norm(positions[j] - positions[i]) <= config.neighbor_distance) neighbors.push_back(agents[j]);
    }
    if (robot != nullptr && norm(robot->position - positions[i]) <= config.neighbor_distance) {
      neighbors.push_back(*robot);
    }
    out[i] = orca_velocity(agents[i], neighbors, tau);
  }
  return out;
}

/// Closed-loop run from a given initial world. `config` supplies the
/// pedestrian model, thresholds and timeout; its kind and seed are only
/// recorded in the log.
inline SimResult run_simulation(const Scenario& scenario, const ScenarioConfig& config, const PredictorKind& predictor,
                                const MpcParams& mpc, const IbrParams& ibr) {
  validate(config);
  if (scenario.human_goals.size() != scenario.human_starts.size()) {
    throw ScenarioError("run_simulation: pedestrian starts and goals differ in count");
  }
  const std::size_t n = scenario.human_starts.size();
  const double tau = mpc.tau;

  SimResult result;
  SimOutcome& out = result.outcome;
  TrajectoryLog& log = result.log;
  log.scenario = scenario;
  log.tau = tau;
  log.scenario_kind = to_string(config.kind);
  log.seed = config.seed;

  RobotState robot{scenario.robot_origin, Vec2{}};
  std::vector<Vec2> peds = scenario.human_starts;
  std::vector<Vec2> ped_vel(n);
  std::vector<char> arrived(n, 0);

  auto frame = [&] {
    WorldHistory::Frame f;
    f.reserve(n + 1);
    f.push_back(robot.position);
    f.insert(f.end(), peds.begin(), peds.end());
    return f;
  };
  WorldHistory history(mpc.history + 1, frame());
  ControlPlan warm = initialize_warm_start(mpc.horizon);
  ControlAction u_prev;

  const auto max_steps = static_cast<long>(std::llround(config.timeout / tau));
  for (long k = 0;; ++k) {
    const double t = static_cast<double>(k) * tau;

    StepRecord rec;
    rec.step = k;
    rec.time = t;
    rec.robot = robot;
    rec.pedestrians = peds;
    rec.pedestrian_velocities = ped_vel;

    double min_dist = std::numeric_limits<double>::infinity();
    bool uncomfortable = false;
    for (std::size_t i = 0; i < n; ++i) {
      min_dist = std::min(min_dist, norm(robot.position - peds[i]));
      uncomfortable = uncomfortable || discomfort_check(robot, peds[i], ped_vel[i], config.discomfort_kappa);
    }
    out.min_separation = std::min(out.min_separation, min_dist);
    out.discomfort_steps += uncomfortable ? 1 : 0;
    rec.discomfort = uncomfortable;

    bool done = true;
    if (min_dist < config.collision_distance) {
      out.status = SimStatus::Collision;
    } else if (norm(robot.position - scenario.robot_goal) <= config.goal_tolerance) {
      out.status = SimStatus::Success;
    } else if (k >= max_steps) {
      out.status = SimStatus::Timeout;
    } else {
      done = false;
    }
    if (done) {
      out.travel_time = std::min(t, config.timeout);
      log.records.push_back(std::move(rec));
      break;
    }

    const auto t0 = std::chrono::steady_clock::now();
    IbrResult step =
        solve_timestep(history, robot, scenario.robot_goal, u_prev, warm, predictor, mpc, ibr);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.step_compute_times.push_back(elapsed);
    ++out.ibr_steps;
    out.ibr_converged_steps += step.converged ? 1 : 0;

    rec.action = step.action;
    rec.ibr_iterations = step.iterations;
    rec.ibr_converged = step.converged;
    rec.solve_seconds = elapsed;
    log.records.push_back(std::move(rec));

    OrcaAgent robot_agent;
    robot_agent.position = robot.position;
    robot_agent.velocity = robot.velocity;
    robot_agent.radius = config.robot_radius;
    const std::vector<Vec2> new_vel = crowd_velocities(peds, ped_vel, scenario.human_goals, arrived, config,
                                                       config.robot_visible ? &robot_agent : nullptr, tau);

    robot = step_dynamics(robot, step.action, tau);
    for (std::size_t i = 0; i < n; ++i) {
      peds[i] += tau * new_vel[i];
      ped_vel[i] = new_vel[i];
      if (!arrived[i] && norm(scenario.human_goals[i] - peds[i]) < kArrivalTolerance) arrived[i] = 1;
    }
    history.push(frame());
    u_prev = step.action;
    warm = shift_warm_start(step.plan);
  }
  return result;
}

inline SimResult run_simulation(const ScenarioConfig& config, const PredictorKind& predictor, const MpcParams& mpc,
                                const IbrParams& ibr) {
  return run_simulation(generate_scenario(config), config, predictor, mpc, ibr);
}

}  // namespace crowdmpc
