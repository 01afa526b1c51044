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

// Crowd-navigation MPC for fixed pedestrian predictions.
//
// The decision variables are the 2H acceleration components of the plan
// (single shooting); robot states are eliminated through the double
// integrator. The objective is
//
//   w_goal * sum |s_k - ref_k|^2                    tracking
// + w_acce * sum |u_k|^2                            effort
// + w_jerk * sum |u_k - u_{k-1}|^2                  rate, u_{-1} = u_prev
// + w_coll * sum_i sum_k smax(d_min^2 + rho |v_k|^2 - |s_k - p_ik|^2)
// + w_vel  * sum_k sum_axis smax(|v_k,axis| - v_max)  (both signs)
//
// over k = 1..H. The acceleration box is enforced exactly by projection; the
// velocity box is a stiff penalty checked after the solve.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "crowdmpc/box_solver.hpp"
#include "crowdmpc/dynamics.hpp"
#include "crowdmpc/error.hpp"
#include "crowdmpc/predictor.hpp"
#include "crowdmpc/vec2.hpp"

namespace crowdmpc {

struct MpcParams {
  double tau{0.4};          // s
  std::size_t horizon{8};   // H
  std::size_t history{8};   // L
  double v_max{1.0};        // m/s, per axis
  double a_max{2.0};        // m/s^2, per axis
  double d_min{0.8};        // m
  double rho{0.5};          // s^2
  double mu{30.0};
  double w_goal{10.0};
  double w_acce{0.1};
  double w_jerk{0.1};
  double w_coll{1e10};
  double w_vel{1e4};

  // Solver settings.
  double tolerance{1e-4};
  int max_iterations{200};
  std::size_t lbfgs_memory{10};
  double velocity_tolerance{1e-3};
  /// When the solution pays more than this raw collision cost, the solve is
  /// repeated from restart_directions constant-acceleration plans and the
  /// cheapest result is kept. A negative threshold restarts on every call;
  /// zero directions disables restarts.
  double restart_collision_cost{-1.0};
  int restart_directions{8};
};

/// Smoothed max(x, 0): (1/mu) log(exp(mu x) + 1), evaluated without overflow.
/// When the exact gap to max(x, 0) is below half an ulp the result is rounded
/// up to the next double, so smax(x) > max(x, 0) holds in floating point.
/// The gap stays within ln2/mu while ulp(x) does, i.e. |mu x| up to ~1e14.
inline double smax(double x, double mu) {
  const double z = mu * x;
  const double s = z > 30.0 ? x + std::log1p(std::exp(-z)) / mu : std::log1p(std::exp(z)) / mu;
  const double m = std::max(x, 0.0);
  if (s > m) return s;
  return std::nextafter(m, std::numeric_limits<double>::infinity());
}

/// d smax / dx, the logistic function of mu x.
inline double smax_derivative(double x, double mu) {
  const double z = mu * x;
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// smax(x) - max(x, 0) computed directly in extended precision, without the
/// one-ulp floor that smax applies.
inline long double smax_gap(long double x, long double mu) {
  return std::log1p(std::exp(-mu * std::abs(x))) / mu;
}

inline double cost_goal(const std::vector<RobotState>& states, const ReferencePath& reference) {
  if (states.size() != reference.points.size()) throw DimensionError("cost_goal: horizon mismatch");
  double sum = 0.0;
  for (std::size_t k = 0; k < states.size(); ++k) sum += norm_sq(states[k].position - reference.points[k]);
  return sum;
}

inline double cost_acce(const ControlPlan& plan) {
  double sum = 0.0;
  for (const auto& a : plan.actions) sum += norm_sq(a.accel);
  return sum;
}

inline double cost_jerk(const ControlPlan& plan, const ControlAction& u_prev) {
  double sum = 0.0;
  Vec2 prev = u_prev.accel;
  for (const auto& a : plan.actions) {
    sum += norm_sq(a.accel - prev);
    prev = a.accel;
  }
  return sum;
}

inline double cost_coll(const std::vector<RobotState>& states, const PredictedTrajectories& predictions,
                        const MpcParams& params) {
  if (predictions.horizon() != states.size()) throw DimensionError("cost_coll: horizon mismatch");
  double sum = 0.0;
  const double d2 = params.d_min * params.d_min;
  for (std::size_t k = 0; k < states.size(); ++k) {
    const double margin = d2 + params.rho * norm_sq(states[k].velocity);
    for (const Vec2& p : predictions.rows[k]) sum += smax(margin - norm_sq(states[k].position - p), params.mu);
  }
  return sum;
}

inline double cost_vel(const std::vector<RobotState>& states, const MpcParams& params) {
  double sum = 0.0;
  for (const auto& s : states) {
    for (double v : {s.velocity.x, s.velocity.y}) {
      sum += smax(v - params.v_max, params.mu) + smax(-v - params.v_max, params.mu);
    }
  }
  return sum;
}

struct CostBreakdown {
  double goal{0.0};
  double acce{0.0};
  double jerk{0.0};
  double coll{0.0};
  double vel{0.0};
  double total{0.0};
};

namespace detail {

inline void check_mpc_inputs(const ControlPlan& plan, const ReferencePath& reference,
                             const PredictedTrajectories& predictions) {
  if (plan.size() == 0) throw DimensionError("mpc: empty plan");
  if (reference.points.size() != plan.size()) throw DimensionError("mpc: reference length differs from plan");
  if (predictions.horizon() != plan.size()) throw DimensionError("mpc: prediction horizon differs from plan");
}

}  // namespace detail

inline CostBreakdown cost_breakdown(const ControlPlan& plan, const ControlAction& u_prev, const RobotState& initial,
                                    const ReferencePath& reference, const PredictedTrajectories& predictions,
                                    const MpcParams& params) {
  detail::check_mpc_inputs(plan, reference, predictions);
  const auto states = rollout(initial, plan, params.tau);
  CostBreakdown c;
  c.goal = cost_goal(states, reference);
  c.acce = cost_acce(plan);
  c.jerk = cost_jerk(plan, u_prev);
  c.coll = cost_coll(states, predictions, params);
  c.vel = cost_vel(states, params);
  c.total = params.w_goal * c.goal + params.w_acce * c.acce + params.w_jerk * c.jerk + params.w_coll * c.coll +
            params.w_vel * c.vel;
  return c;
}

inline double total_cost(const ControlPlan& plan, const ControlAction& u_prev, const RobotState& initial,
                         const ReferencePath& reference, const PredictedTrajectories& predictions,
                         const MpcParams& params) {
  return cost_breakdown(plan, u_prev, initial, reference, predictions, params).total;
}

/// Objective value and its gradient with respect to the flattened plan
/// [a0x, a0y, a1x, ...], accumulated backward through the rollout.
inline double total_cost_and_gradient(const ControlPlan& plan, const ControlAction& u_prev,
                                      const RobotState& initial, const ReferencePath& reference,
                                      const PredictedTrajectories& predictions, const MpcParams& params,
                                      std::vector<double>& gradient) {
  detail::check_mpc_inputs(plan, reference, predictions);
  const std::size_t horizon = plan.size();
  const double tau = params.tau;
  const double mu = params.mu;
  const double d2 = params.d_min * params.d_min;
  const auto states = rollout(initial, plan, tau);

  // Direct partials of the cost w.r.t. each state.
  std::vector<Vec2> ds(horizon), dv(horizon);
  double goal = 0.0, coll = 0.0, vel = 0.0;
  for (std::size_t k = 0; k < horizon; ++k) {
    const Vec2& s = states[k].position;
    const Vec2& v = states[k].velocity;
    const Vec2 err = s - reference.points[k];
    goal += norm_sq(err);
    ds[k] = (2.0 * params.w_goal) * err;

    const double margin = d2 + params.rho * norm_sq(v);
    for (const Vec2& p : predictions.rows[k]) {
      const Vec2 rel = s - p;
      const double x = margin - norm_sq(rel);
      coll += smax(x, mu);
      const double g = params.w_coll * smax_derivative(x, mu);
      ds[k] -= (2.0 * g) * rel;
      dv[k] += (2.0 * params.rho * g) * v;
    }

    double* dv_axis[2] = {&dv[k].x, &dv[k].y};
    const double v_axis[2] = {v.x, v.y};
    for (int a = 0; a < 2; ++a) {
      vel += smax(v_axis[a] - params.v_max, mu) + smax(-v_axis[a] - params.v_max, mu);
      *dv_axis[a] += params.w_vel * (smax_derivative(v_axis[a] - params.v_max, mu) -
                                     smax_derivative(-v_axis[a] - params.v_max, mu));
    }
  }

  gradient.assign(2 * horizon, 0.0);
  double acce = 0.0, jerk = 0.0;
  Vec2 prev = u_prev.accel;
  for (std::size_t k = 0; k < horizon; ++k) {
    const Vec2& u = plan[k].accel;
    acce += norm_sq(u);
    const Vec2 du = u - prev;
    jerk += norm_sq(du);
    Vec2 gu = (2.0 * params.w_acce) * u + (2.0 * params.w_jerk) * du;
    if (k + 1 < horizon) gu -= (2.0 * params.w_jerk) * (plan[k + 1].accel - u);
    gradient[2 * k] = gu.x;
    gradient[2 * k + 1] = gu.y;
    prev = u;
  }

  Vec2 adj_s, adj_v;
  const double half_tau2 = 0.5 * tau * tau;
  for (std::size_t k = horizon; k-- > 0;) {
    adj_s += ds[k];
    adj_v += dv[k];
    gradient[2 * k] += half_tau2 * adj_s.x + tau * adj_v.x;
    gradient[2 * k + 1] += half_tau2 * adj_s.y + tau * adj_v.y;
    adj_v += tau * adj_s;
  }

  return params.w_goal * goal + params.w_acce * acce + params.w_jerk * jerk + params.w_coll * coll +
         params.w_vel * vel;
}

inline std::vector<double> total_cost_gradient(const ControlPlan& plan, const ControlAction& u_prev,
                                               const RobotState& initial, const ReferencePath& reference,
                                               const PredictedTrajectories& predictions, const MpcParams& params) {
  std::vector<double> g;
  total_cost_and_gradient(plan, u_prev, initial, reference, predictions, params, g);
  return g;
}

/// Largest amount by which any rolled-out velocity component exceeds v_max.
inline double velocity_violation(const std::vector<RobotState>& states, double v_max) {
  double worst = 0.0;
  for (const auto& s : states) {
    worst = std::max({worst, std::abs(s.velocity.x) - v_max, std::abs(s.velocity.y) - v_max});
  }
  return worst;
}

struct MpcSolution {
  ControlPlan plan;
  std::vector<RobotState> states;
  double objective{0.0};
  int iterations{0};
  bool converged{false};
  double velocity_violation{0.0};
  std::vector<double> trace;  // accepted objective values of the kept solve
};

/// Locally optimal plan for fixed predictions, starting from `warm_start`.
/// The problem is solved in coordinates centred on the robot, so rigid
/// translations of the inputs do not change the plan.
inline MpcSolution solve_mpc(const RobotState& initial, const ControlAction& u_prev, const ReferencePath& reference,
                             const PredictedTrajectories& predictions, const MpcParams& params,
                             const ControlPlan& warm_start, bool record_trace = false) {
  detail::check_mpc_inputs(warm_start, reference, predictions);
  if (!within_box(warm_start, params.a_max)) throw SolverInputError("solve_mpc: warm start violates the box");
  if (!is_finite(initial.position) || !is_finite(initial.velocity)) {
    throw InvalidStateError("solve_mpc: non-finite initial state");
  }

  const Vec2 origin = initial.position;
  const RobotState local{Vec2{}, initial.velocity};
  ReferencePath local_ref = reference;
  for (Vec2& p : local_ref.points) p -= origin;
  PredictedTrajectories local_pred = predictions;
  for (auto& row : local_pred.rows) {
    for (Vec2& p : row) p -= origin;
  }

  MpcParams working = params;
  auto objective = [&](const std::vector<double>& x, std::vector<double>& g) {
    return total_cost_and_gradient(ControlPlan::unflatten(x), u_prev, local, local_ref, local_pred, working, g);
  };

  std::vector<double> x = warm_start.flatten();
  std::vector<double> g;
  const double f0 = objective(x, g);
  if (!std::isfinite(f0)) throw SolverInputError("solve_mpc: objective is not finite at the warm start");

  const std::vector<double> lower(x.size(), -params.a_max);
  const std::vector<double> upper(x.size(), params.a_max);
  BoxSolverOptions options;
  options.tolerance = params.tolerance;
  options.max_iterations = params.max_iterations;
  options.memory = params.lbfgs_memory;
  options.record_trace = record_trace;

  struct Local {
    std::vector<double> x;
    int iterations{0};
    bool converged{false};
    double objective{0.0};
    double coll{0.0};
    std::vector<double> trace;
  };
  // Local solve from x0. The velocity box is soft in the objective; stiffen
  // it if the optimum leaves it by more than the tolerance.
  auto local_solve = [&](std::vector<double> x0) {
    working.w_vel = params.w_vel;
    BoxSolverResult r = minimize_box(objective, std::move(x0), lower, upper, options);
    Local out;
    out.trace = std::move(r.trace);
    out.iterations = r.iterations;
    out.converged = r.converged;
    out.x = std::move(r.x);
    auto states = rollout(local, ControlPlan::unflatten(out.x), params.tau);
    for (int escalation = 0; escalation < 3 && velocity_violation(states, params.v_max) > params.velocity_tolerance;
         ++escalation) {
      working.w_vel *= 100.0;
      BoxSolverResult again = minimize_box(objective, out.x, lower, upper, options);
      out.iterations += again.iterations;
      out.converged = again.converged;
      out.x = std::move(again.x);
      states = rollout(local, ControlPlan::unflatten(out.x), params.tau);
    }
    const auto c = cost_breakdown(ControlPlan::unflatten(out.x), u_prev, local, local_ref, local_pred, params);
    out.objective = c.total;
    out.coll = c.coll;
    return out;
  };

  Local best = local_solve(x);
  int iterations = best.iterations;
  if (best.coll > params.restart_collision_cost && params.restart_directions > 0) {
    const std::size_t horizon = warm_start.size();
    for (int d = 0; d < params.restart_directions; ++d) {
      const double angle = 2.0 * std::numbers::pi * d / params.restart_directions;
      const Vec2 a{std::clamp(params.a_max * std::cos(angle), -params.a_max, params.a_max),
                   std::clamp(params.a_max * std::sin(angle), -params.a_max, params.a_max)};
      ControlPlan start;
      start.actions.assign(horizon, ControlAction{a});
      Local candidate = local_solve(start.flatten());
      iterations += candidate.iterations;
      if (candidate.objective < best.objective) best = std::move(candidate);
    }
  }

  MpcSolution sol;
  sol.trace = std::move(best.trace);
  sol.iterations = iterations;
  sol.converged = best.converged;
  x = std::move(best.x);
  auto states = rollout(local, ControlPlan::unflatten(x), params.tau);

  sol.plan = ControlPlan::unflatten(x);
  sol.velocity_violation = velocity_violation(states, params.v_max);
  sol.objective = best.objective;
  sol.states = std::move(states);
  for (auto& s : sol.states) s.position += origin;
  return sol;
}

}  // namespace crowdmpc
