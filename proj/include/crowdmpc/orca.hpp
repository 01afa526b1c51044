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

// Optimal Reciprocal Collision Avoidance for the simulated pedestrians.
//
// Each neighbour contributes one half-plane of admissible velocities; the new
// velocity is the point of their intersection (clipped to the speed disc)
// closest to the preferred velocity. When the intersection is empty the
// velocity minimising the largest penetration is used instead.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "crowdmpc/vec2.hpp"

namespace crowdmpc {

struct OrcaAgent {
  Vec2 position;
  Vec2 velocity;
  double radius{0.3};
  Vec2 pref_velocity;
  double max_speed{1.0};
  double time_horizon{5.0};
  /// Whether this agent takes half of the avoidance effort. Agents that do
  /// not react (parked pedestrians) are avoided with full responsibility by
  /// their neighbours.
  bool reciprocal{true};
};

/// Admissible velocities v satisfy dot(v - point, normal) >= 0.
struct HalfPlane {
  Vec2 point;
  Vec2 normal;

  /// Boundary direction with the admissible side on its left.
  Vec2 direction() const { return {normal.y, -normal.x}; }

  /// Positive when v lies outside.
  double violation(const Vec2& v) const { return -dot(v - point, normal); }
};

namespace detail {

inline constexpr double kLpEpsilon = 1e-5;

// Optimises along the boundary of half-plane `index` subject to planes
// [0, index) and the disc. Returns false when that segment is empty.
inline bool lp1(std::span<const HalfPlane> planes, std::size_t index, double radius, const Vec2& opt,
                bool direction_opt, Vec2& result) {
  const Vec2 point = planes[index].point;
  const Vec2 dir = planes[index].direction();
  const double dp = dot(point, dir);
  const double discriminant = dp * dp + radius * radius - norm_sq(point);
  if (discriminant < 0.0) return false;

  const double sqrt_disc = std::sqrt(discriminant);
  double t_left = -dp - sqrt_disc;
  double t_right = -dp + sqrt_disc;

  for (std::size_t i = 0; i < index; ++i) {
    const Vec2 dir_i = planes[i].direction();
    const double denominator = det(dir, dir_i);
    const double numerator = det(dir_i, point - planes[i].point);
    if (std::abs(denominator) <= kLpEpsilon) {
      if (numerator < 0.0) return false;
      continue;
    }
    const double t = numerator / denominator;
    if (denominator >= 0.0) {
      t_right = std::min(t_right, t);
    } else {
      t_left = std::max(t_left, t);
    }
    if (t_left > t_right) return false;
  }

  if (direction_opt) {
    result = dot(opt, dir) > 0.0 ? point + t_right * dir : point + t_left * dir;
  } else {
    const double t = std::clamp(dot(dir, opt - point), t_left, t_right);
    result = point + t * dir;
  }
  return true;
}

// Returns planes.size() on success, otherwise the index of the plane that
// could not be satisfied; `result` then holds the optimum over the prefix.
inline std::size_t lp2(std::span<const HalfPlane> planes, double radius, const Vec2& opt, bool direction_opt,
                       Vec2& result) {
  if (direction_opt) {
    result = opt * radius;
  } else if (norm_sq(opt) > radius * radius) {
    result = normalized(opt) * radius;
  } else {
    result = opt;
  }
  for (std::size_t i = 0; i < planes.size(); ++i) {
    if (det(planes[i].direction(), planes[i].point - result) > 0.0) {
      const Vec2 previous = result;
      if (!lp1(planes, i, radius, opt, direction_opt, result)) {
        result = previous;
        return i;
      }
    }
  }
  return planes.size();
}

// Least-penetration fallback starting at the first infeasible plane.
inline void lp3(std::span<const HalfPlane> planes, std::size_t begin, double radius, Vec2& result) {
  double distance = 0.0;
  std::vector<HalfPlane> projected;
  for (std::size_t i = begin; i < planes.size(); ++i) {
    const Vec2 dir_i = planes[i].direction();
    if (det(dir_i, planes[i].point - result) <= distance) continue;

    projected.clear();
    for (std::size_t j = 0; j < i; ++j) {
      const Vec2 dir_j = planes[j].direction();
      const double determinant = det(dir_i, dir_j);
      Vec2 point;
      if (std::abs(determinant) <= kLpEpsilon) {
        if (dot(dir_i, dir_j) > 0.0) continue;  // same direction
        point = 0.5 * (planes[i].point + planes[j].point);
      } else {
        point = planes[i].point + (det(dir_j, planes[i].point - planes[j].point) / determinant) * dir_i;
      }
      const Vec2 dir = normalized(dir_j - dir_i);
      projected.push_back(HalfPlane{point, Vec2{-dir.y, dir.x}});
    }

    const Vec2 previous = result;
    if (lp2(projected, radius, Vec2{-dir_i.y, dir_i.x}, true, result) < projected.size()) {
      // Only reachable through floating-point error; keep the last result.
      result = previous;
    }
    distance = det(dir_i, planes[i].point - result);
  }
}

}  // namespace detail

/// Closest admissible velocity to `pref` inside the speed disc, or nullopt
/// when the half-planes and the disc do not intersect.
inline std::optional<Vec2> lp2d(std::span<const HalfPlane> planes, const Vec2& pref, double max_speed) {
  Vec2 result;
  if (detail::lp2(planes, max_speed, pref, false, result) < planes.size()) return std::nullopt;
  return result;
}

/// Velocity in the speed disc minimising the largest half-plane violation.
/// Agrees with lp2d whenever the problem is feasible.
inline Vec2 lp3d(std::span<const HalfPlane> planes, const Vec2& pref, double max_speed) {
  Vec2 result;
  const std::size_t failed = detail::lp2(planes, max_speed, pref, false, result);
  if (failed < planes.size()) detail::lp3(planes, failed, max_speed, result);
  return result;
}

/// ORCA half-plane induced on `self` by one neighbour. `tau` is the
/// simulation step, used only when the two already overlap.
inline HalfPlane orca_half_plane(const OrcaAgent& self, const OrcaAgent& other, double tau) {
  const double inv_horizon = 1.0 / self.time_horizon;
  const Vec2 rel_pos = other.position - self.position;
  const Vec2 rel_vel = self.velocity - other.velocity;
  const double dist_sq = norm_sq(rel_pos);
  const double combined_radius = self.radius + other.radius;
  const double combined_radius_sq = combined_radius * combined_radius;

  Vec2 direction;
  Vec2 u;
  if (dist_sq > combined_radius_sq) {
    const Vec2 w = rel_vel - inv_horizon * rel_pos;
    const double w_length_sq = norm_sq(w);
    const double dp1 = dot(w, rel_pos);
    if (dp1 < 0.0 && dp1 * dp1 > combined_radius_sq * w_length_sq) {
      // Cut-off circle.
      const double w_length = std::sqrt(w_length_sq);
      const Vec2 unit_w = w / w_length;
      direction = {unit_w.y, -unit_w.x};
      u = (combined_radius * inv_horizon - w_length) * unit_w;
    } else {
      const double leg = std::sqrt(dist_sq - combined_radius_sq);
      // Exactly colinear relative motion picks the left leg, so both agents
      // of a head-on pair swerve the same way (counter-clockwise).
      if (det(rel_pos, w) >= 0.0) {
        direction = Vec2{rel_pos.x * leg - rel_pos.y * combined_radius,
                         rel_pos.x * combined_radius + rel_pos.y * leg} /
                    dist_sq;
      } else {
        direction = -Vec2{rel_pos.x * leg + rel_pos.y * combined_radius,
                          -rel_pos.x * combined_radius + rel_pos.y * leg} /
                    dist_sq;
      }
      u = dot(rel_vel, direction) * direction - rel_vel;
    }
  } else {
    // Already overlapping: resolve within one step.
    const double inv_step = 1.0 / tau;
    const Vec2 w = rel_vel - inv_step * rel_pos;
    const double w_length = norm(w);
    const Vec2 unit_w = w_length > 0.0 ? w / w_length : Vec2{1.0, 0.0};
    direction = {unit_w.y, -unit_w.x};
    u = (combined_radius * inv_step - w_length) * unit_w;
  }

  const double share = other.reciprocal ? 0.5 : 1.0;
  return HalfPlane{self.velocity + share * u, Vec2{-direction.y, direction.x}};
}

/// New velocity for `self`. Neighbours are considered nearest first.
inline Vec2 orca_velocity(const OrcaAgent& self, std::span<const OrcaAgent> neighbors, double tau) {
  std::vector<const OrcaAgent*> sorted;
  sorted.reserve(neighbors.size());
  for (const auto& n : neighbors) sorted.push_back(&n);
  std::stable_sort(sorted.begin(), sorted.end(), [&self](const OrcaAgent* a, const OrcaAgent* b) {
    return norm_sq(a->position - self.position) < norm_sq(b->position - self.position);
  });

  std::vector<HalfPlane> planes;
  planes.reserve(sorted.size());
  for (const OrcaAgent* n : sorted) planes.push_back(orca_half_plane(self, *n, tau));
  return lp3d(planes, self.pref_velocity, self.max_speed);
}

}  // namespace crowdmpc
