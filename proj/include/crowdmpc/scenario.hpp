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

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "crowdmpc/error.hpp"
#include "crowdmpc/vec2.hpp"

namespace crowdmpc {

enum class ScenarioKind { CircleCrossing, SquareCrossing };

inline std::string to_string(ScenarioKind k) {
  return k == ScenarioKind::CircleCrossing ? "circle" : "square";
}

inline ScenarioKind scenario_kind_from_string(const std::string& s) {
  if (s == "circle") return ScenarioKind::CircleCrossing;
  if (s == "square") return ScenarioKind::SquareCrossing;
  throw ScenarioError("unknown scenario kind '" + s + "' (expected circle or square)");
}

struct ScenarioConfig {
  ScenarioKind kind{ScenarioKind::CircleCrossing};
  int n_humans{5};
  double circle_radius{4.0};    // m
  double square_side{10.0};     // m
  double angular_jitter{0.5};   // rad, goal offset from the antipode
  double human_radius{0.3};     // m
  double orca_margin{0.05};     // m, added to pedestrian radii inside ORCA only
  double human_pref_speed{1.0}; // m/s
  double human_time_horizon{5.0};
  double neighbor_distance{10.0};
  double robot_radius{0.5};     // as seen by pedestrians
  bool robot_visible{true};
  double goal_tolerance{0.3};   // m
  double collision_distance{0.8};
  double discomfort_kappa{1.0}; // s
  double timeout{30.0};         // s
  std::uint64_t seed{0};
};

inline void validate(const ScenarioConfig& c) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ScenarioError(std::string(name) + " must be positive");
  };
  if (c.n_humans < 0) throw ScenarioError("n_humans must be non-negative");
  positive(c.circle_radius, "circle_radius");
  positive(c.square_side, "square_side");
  positive(c.human_radius, "human_radius");
  positive(c.human_pref_speed, "human_pref_speed");
  positive(c.human_time_horizon, "human_time_horizon");
  positive(c.neighbor_distance, "neighbor_distance");
  positive(c.robot_radius, "robot_radius");
  positive(c.goal_tolerance, "goal_tolerance");
  positive(c.collision_distance, "collision_distance");
  positive(c.discomfort_kappa, "discomfort_kappa");
  positive(c.timeout, "timeout");
  if (!(c.angular_jitter >= 0.0)) throw ScenarioError("angular_jitter must be non-negative");
  if (!(c.orca_margin >= 0.0) || !std::isfinite(c.orca_margin)) throw ScenarioError("orca_margin must be non-negative");
}

/// Initial world: robot origin/goal and pedestrian starts/goals.
struct Scenario {
  Vec2 robot_origin;
  Vec2 robot_goal;
  std::vector<Vec2> human_starts;
  std::vector<Vec2> human_goals;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

namespace detail {

/// Uniform [0, 1) from the top 53 bits; identical across standard libraries.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace detail

inline constexpr int kMaxPlacementAttempts = 10000;

/// Robot crosses from (0, -R) to (0, R) with R the circle radius in both
/// layouts. Circle: pedestrians start on the circle and head for a point
/// within +-angular_jitter of the antipode. Square: starts and goals are
/// drawn uniformly on opposite halves of the square. Starts (and goals) are
/// kept at least twice the radius sum apart, robot included.
inline Scenario generate_scenario(const ScenarioConfig& config) {
  validate(config);
  std::mt19937_64 rng(config.seed);
  Scenario sc;
  const double r = config.circle_radius;
  sc.robot_origin = {0.0, -r};
  sc.robot_goal = {0.0, r};

  const double human_sep = 2.0 * (2.0 * config.human_radius);
  const double robot_sep = 2.0 * (config.human_radius + config.robot_radius);
  auto clear_of = [=](const Vec2& p, const Vec2& robot, const std::vector<Vec2>& others) {
    if (norm(p - robot) < robot_sep) return false;
    for (const Vec2& o : others) {
      if (norm(p - o) < human_sep) return false;
    }
    return true;
  };

  int attempts = 0;
  while (static_cast<int>(sc.human_starts.size()) < config.n_humans) {
    if (++attempts > kMaxPlacementAttempts) {
      throw ScenarioError("generate_scenario: could not place " + std::to_string(config.n_humans) +
                          " pedestrians (over-crowded scenario)");
    }
    Vec2 start, goal;
    if (config.kind == ScenarioKind::CircleCrossing) {
      const double angle = 2.0 * std::numbers::pi * detail::uniform01(rng);
      const double jitter = config.angular_jitter * (2.0 * detail::uniform01(rng) - 1.0);
      start = {r * std::cos(angle), r * std::sin(angle)};
      goal = {r * std::cos(angle + std::numbers::pi + jitter), r * std::sin(angle + std::numbers::pi + jitter)};
    } else {
      const double side = config.square_side;
      const double sign = detail::uniform01(rng) < 0.5 ? -1.0 : 1.0;
      start = {detail::uniform01(rng) * 0.5 * side * sign, (detail::uniform01(rng) - 0.5) * side};
      goal = {detail::uniform01(rng) * 0.5 * side * -sign, (detail::uniform01(rng) - 0.5) * side};
    }
    if (!clear_of(start, sc.robot_origin, sc.human_starts)) continue;
    if (!clear_of(goal, sc.robot_goal, sc.human_goals)) continue;
    sc.human_starts.push_back(start);
    sc.human_goals.push_back(goal);
  }
  return sc;
}

}  // namespace crowdmpc
