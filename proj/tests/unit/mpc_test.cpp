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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "crowdmpc/box_solver.hpp"
#include "crowdmpc/mpc.hpp"

namespace crowdmpc {
namespace {

struct Instance {
  ControlPlan plan;
  ControlAction u_prev;
  RobotState initial;
  ReferencePath reference;
  PredictedTrajectories predictions;
};

Instance random_instance(std::mt19937_64& rng, std::size_t horizon, std::size_t peds, const MpcParams& p) {
  std::uniform_real_distribution<double> acc(-p.a_max, p.a_max);
  std::uniform_real_distribution<double> pos(-3, 3);
  std::uniform_real_distribution<double> vel(-1, 1);
  Instance in;
  for (std::size_t k = 0; k < horizon; ++k) in.plan.actions.push_back({{acc(rng), acc(rng)}});
  in.u_prev = {{acc(rng), acc(rng)}};
  in.initial = {{pos(rng), pos(rng)}, {vel(rng), vel(rng)}};
  in.reference = reference_trajectory(in.initial.position, {pos(rng), pos(rng)}, horizon, p.tau, p.v_max);
  const auto states = rollout(in.initial, in.plan, p.tau);
  in.predictions = PredictedTrajectories::empty(horizon);
  std::uniform_real_distribution<double> near(-1.2, 1.2);
  for (std::size_t i = 0; i < peds; ++i) {
    // Pedestrians near the rolled-out path so the barrier is in its
    // curved region rather than flat.
    for (std::size_t k = 0; k < horizon; ++k) {
      in.predictions.rows[k].push_back(states[k].position + Vec2{near(rng), near(rng)});
    }
  }
  return in;
}

double relative_error(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

TEST(Smax, ClosedFormValues) {
  EXPECT_NEAR(smax(0.0, 30.0), std::log(2.0) / 30.0, 1e-15);
  EXPECT_NEAR(smax(0.0, 30.0), 0.023105, 1e-6);
  EXPECT_LE(smax(-1.0, 30.0), 1e-13);
  EXPECT_NEAR(smax(-1.0, 30.0), std::exp(-30.0) / 30.0, 1e-25);
  EXPECT_NEAR(smax(1.0, 30.0), 1.0, 1e-12);
}

TEST(Smax, StrictlyAboveMaxAndOverflowSafe) {
  const double mu = 30.0;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1000.0 / mu, 1000.0 / mu);
  for (int i = 0; i < 10000; ++i) {
    const double x = u(rng);
    const double s = smax(x, mu);
    ASSERT_TRUE(std::isfinite(s)) << x;
    EXPECT_GT(s - std::max(x, 0.0), 0.0) << x;
    EXPECT_LE(s - std::max(x, 0.0), std::log(2.0) / mu);
    const long double gap = smax_gap(x, mu);
    EXPECT_GT(gap, 0.0L) << x;
    EXPECT_LE(gap, std::log(2.0L) / mu);
  }
}

TEST(Smax, StrictlyIncreasing) {
  double prev = smax(-3.0, 30.0);
  for (double x = -2.99; x <= 3.0; x += 0.01) {
    const double s = smax(x, 30.0);
    EXPECT_GT(s, prev) << x;
    prev = s;
  }
}

TEST(Smax, DerivativeMatchesFiniteDifference) {
  for (double x : {-0.5, -0.05, 0.0, 0.02, 0.4, 2.0}) {
    const double h = 1e-7;
    const double fd = (smax(x + h, 30.0) - smax(x - h, 30.0)) / (2 * h);
    EXPECT_NEAR(smax_derivative(x, 30.0), fd, 1e-6);
  }
}

TEST(CostTerms, GoalExamples) {
  const ReferencePath ref{{{1, 1}, {2, 2}}};
  std::vector<RobotState> states{{{1, 1}, {}}, {{2, 2}, {}}};
  EXPECT_EQ(cost_goal(states, ref), 0.0);
  states[1].position = {5, 6};
  EXPECT_DOUBLE_EQ(cost_goal(states, ref), 25.0);
  states[0].position = {1 + 0.5, 1 - 1.0};
  const double base = cost_goal(states, ref);
  states[0].position = {1 + 1.0, 1 - 2.0};
  states[1].position = {2 + 6.0, 2 + 8.0};
  EXPECT_DOUBLE_EQ(cost_goal(states, ref), 4.0 * base);
}

TEST(CostTerms, AccelerationAndJerkExamples) {
  ControlPlan plan = ControlPlan::zeros(8);
  EXPECT_EQ(cost_acce(plan), 0.0);
  EXPECT_EQ(cost_jerk(plan, ControlAction{}), 0.0);
  plan.actions[3].accel = {1, 2};
  EXPECT_DOUBLE_EQ(cost_acce(plan), 5.0);
  EXPECT_DOUBLE_EQ(cost_jerk(plan, ControlAction{}), 10.0);
  ControlPlan constant;
  constant.actions.assign(8, ControlAction{{0.7, -1.1}});
  EXPECT_EQ(cost_jerk(constant, ControlAction{{0.7, -1.1}}), 0.0);
}

TEST(CostTerms, CollisionExamples) {
  MpcParams p;
  const std::vector<RobotState> rest(8, RobotState{{0, 0}, {0, 0}});
  PredictedTrajectories far = PredictedTrajectories::empty(8);
  for (auto& row : far.rows) row.push_back({100, 0});
  EXPECT_LE(cost_coll(rest, far, p), 1e-12);

  PredictedTrajectories touching = PredictedTrajectories::empty(8);
  for (auto& row : touching.rows) row.push_back({p.d_min, 0});
  EXPECT_NEAR(cost_coll(rest, touching, p), 8.0 * std::log(2.0) / 30.0, 1e-12);
  EXPECT_NEAR(cost_coll(rest, touching, p), 0.18484, 1e-5);

  EXPECT_EQ(cost_coll(rest, PredictedTrajectories::empty(8), p), 0.0);
}

TEST(CostTerms, TotalAtRestAtGoalIsZero) {
  MpcParams p;
  const RobotState s{{2, 3}, {0, 0}};
  const auto ref = reference_trajectory(s.position, s.position, 8, p.tau, p.v_max);
  // The velocity barrier contributes 4 H smax(-v_max) ~ 1e-15 per unit weight.
  const double total = total_cost(ControlPlan::zeros(8), ControlAction{}, s, ref, PredictedTrajectories::empty(8), p);
  EXPECT_LE(total, 1e-9);
  const auto g = total_cost_gradient(ControlPlan::zeros(8), ControlAction{}, s, ref, PredictedTrajectories::empty(8), p);
  for (double x : g) EXPECT_LE(std::abs(x), 1e-9);
}

TEST(CostTerms, TotalIsWeightedSumOfTerms) {
  MpcParams p;
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Instance in = random_instance(rng, 8, 3, p);
    const auto states = rollout(in.initial, in.plan, p.tau);
    const double manual = p.w_goal * cost_goal(states, in.reference) + p.w_acce * cost_acce(in.plan) +
                          p.w_jerk * cost_jerk(in.plan, in.u_prev) + p.w_coll * cost_coll(states, in.predictions, p) +
                          p.w_vel * cost_vel(states, p);
    const double total = total_cost(in.plan, in.u_prev, in.initial, in.reference, in.predictions, p);
    EXPECT_LE(relative_error(total, manual), 1e-12);
    std::vector<double> g;
    const double fused =
        total_cost_and_gradient(in.plan, in.u_prev, in.initial, in.reference, in.predictions, p, g);
    EXPECT_LE(relative_error(total, fused), 1e-12);
  }
}

TEST(CostTerms, WeightsScaleTermsLinearly) {
  MpcParams p;
  std::mt19937_64 rng(6);
  const Instance in = random_instance(rng, 8, 2, p);
  const auto base = cost_breakdown(in.plan, in.u_prev, in.initial, in.reference, in.predictions, p);
  MpcParams q = p;
  q.w_jerk *= 3.0;
  const auto scaled = cost_breakdown(in.plan, in.u_prev, in.initial, in.reference, in.predictions, q);
  EXPECT_NEAR(scaled.total - base.total, 2.0 * p.w_jerk * base.jerk, 1e-9 * std::abs(base.total));
}

TEST(Gradient, OneStepGoalOnlyByHand) {
  MpcParams p;
  p.w_acce = p.w_jerk = p.w_coll = p.w_vel = 0.0;
  const RobotState s{{0.5, -0.25}, {0.3, 0.1}};
  ControlPlan plan;
  plan.actions = {{{0.7, -1.3}}};
  const ReferencePath ref{{{1.0, 1.0}}};
  const auto g = total_cost_gradient(plan, ControlAction{}, s, ref, PredictedTrajectories::empty(1), p);
  const RobotState next = step_dynamics(s, plan[0], p.tau);
  const double half_tau2 = 0.5 * p.tau * p.tau;
  EXPECT_NEAR(g[0], 2.0 * p.w_goal * (next.position.x - 1.0) * half_tau2, 1e-12);
  EXPECT_NEAR(g[1], 2.0 * p.w_goal * (next.position.y - 1.0) * half_tau2, 1e-12);
}

TEST(Gradient, MatchesCentralFiniteDifferences) {
  MpcParams p;
  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Instance in = random_instance(rng, 8, 3, p);
    const auto g = total_cost_gradient(in.plan, in.u_prev, in.initial, in.reference, in.predictions, p);
    auto x = in.plan.flatten();
    double scale = 0.0;
    std::vector<double> fd(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double h = 1e-6;
      auto xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      const double fp =
          total_cost(ControlPlan::unflatten(xp), in.u_prev, in.initial, in.reference, in.predictions, p);
      const double fm =
          total_cost(ControlPlan::unflatten(xm), in.u_prev, in.initial, in.reference, in.predictions, p);
      fd[i] = (fp - fm) / (2 * h);
      scale = std::max(scale, std::abs(fd[i]));
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      worst = std::max(worst, std::abs(g[i] - fd[i]) / std::max(scale, 1.0));
    }
  }
  EXPECT_LE(worst, 1e-4);
}

TEST(BoxSolver, QuadraticWithActiveBound) {
  // min (x0 - 3)^2 + (x1 + 0.5)^2 over [-1, 1]^2 -> (1, -0.5).
  auto f = [](const std::vector<double>& x, std::vector<double>& g) {
    g = {2 * (x[0] - 3), 2 * (x[1] + 0.5)};
    return (x[0] - 3) * (x[0] - 3) + (x[1] + 0.5) * (x[1] + 0.5);
  };
  BoxSolverOptions o;
  o.record_trace = true;
  const auto r = minimize_box(f, {0.0, 0.0}, {-1, -1}, {1, 1}, o);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 1.0, 1e-9);
  EXPECT_NEAR(r.x[1], -0.5, 1e-5);
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i], r.trace[i - 1]);
}

TEST(BoxSolver, Rosenbrock) {
  auto f = [](const std::vector<double>& x, std::vector<double>& g) {
    const double a = 1 - x[0], b = x[1] - x[0] * x[0];
    g = {-2 * a - 400 * x[0] * b, 200 * b};
    return a * a + 100 * b * b;
  };
  BoxSolverOptions o;
  o.max_iterations = 2000;
  o.tolerance = 1e-8;
  const auto r = minimize_box(f, {-1.2, 1.0}, {-2, -2}, {2, 2}, o);
  EXPECT_NEAR(r.x[0], 1.0, 1e-5);
  EXPECT_NEAR(r.x[1], 1.0, 1e-5);
}

MpcSolution solve_default(const RobotState& s, const Vec2& goal, const PredictedTrajectories& pred,
                          const MpcParams& p, bool trace = false) {
  const auto ref = reference_trajectory(s.position, goal, p.horizon, p.tau, p.v_max);
  return solve_mpc(s, ControlAction{}, ref, pred, p, ControlPlan::zeros(p.horizon), trace);
}

TEST(SolveMpc, FirstActionHeadsForTheGoal) {
  MpcParams p;
  const RobotState s{{0, 0}, {0, 0}};
  const Vec2 goal{0.6, 0.8};
  const auto ref = reference_trajectory(s.position, goal, p.horizon, p.tau, p.v_max);
  const auto empty = PredictedTrajectories::empty(p.horizon);
  const auto sol = solve_mpc(s, ControlAction{}, ref, empty, p, ControlPlan::zeros(p.horizon));
  EXPECT_GT(dot(sol.plan[0].accel, goal), 0.0);

  // Grid search over constant accelerations along the line.
  double best = std::numeric_limits<double>::infinity();
  double best_a = 0.0;
  for (double a = -p.a_max; a <= p.a_max + 1e-12; a += 0.01) {
    ControlPlan c;
    c.actions.assign(p.horizon, ControlAction{a * goal});
    const double f = total_cost(c, ControlAction{}, s, ref, empty, p);
    if (f < best) {
      best = f;
      best_a = a;
    }
  }
  EXPECT_GT(best_a, 0.0);
  EXPECT_LE(sol.objective, best);
}

TEST(SolveMpc, OptimalWarmStartIsAFixedPoint) {
  MpcParams p;
  const RobotState s{{0, 0}, {0.2, 0}};
  const auto ref = reference_trajectory(s.position, {3, 1}, p.horizon, p.tau, p.v_max);
  const auto empty = PredictedTrajectories::empty(p.horizon);
  const auto first = solve_mpc(s, ControlAction{}, ref, empty, p, ControlPlan::zeros(p.horizon));
  const auto again = solve_mpc(s, ControlAction{}, ref, empty, p, first.plan);
  EXPECT_TRUE(again.converged);
  EXPECT_LE(plan_distance(first.plan, again.plan), 1e-3);
}

TEST(SolveMpc, DetoursAroundAPedestrianOnThePath) {
  MpcParams p;
  const RobotState s{{0, 0}, {0, 0}};
  const Vec2 goal{0, 3};
  PredictedTrajectories ped = PredictedTrajectories::empty(p.horizon);
  for (auto& row : ped.rows) row.push_back({0, 1.5});
  const auto with_ped = solve_default(s, goal, ped, p);
  const auto straight = solve_default(s, goal, PredictedTrajectories::empty(p.horizon), p);
  auto clearance = [&](const std::vector<RobotState>& states) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& x : states) d = std::min(d, norm(x.position - Vec2{0, 1.5}));
    return d;
  };
  EXPECT_GT(clearance(with_ped.states), clearance(straight.states));
  EXPECT_GT(clearance(with_ped.states), p.d_min);
}

TEST(SolveMpc, ResultIsBoxFeasibleAndNoWorseThanWarmStart) {
  MpcParams p;
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const Instance in = random_instance(rng, p.horizon, 3, p);
    const auto sol = solve_mpc(in.initial, in.u_prev, in.reference, in.predictions, p, in.plan, true);
    for (const auto& a : sol.plan.actions) {
      EXPECT_LE(std::abs(a.accel.x), p.a_max);
      EXPECT_LE(std::abs(a.accel.y), p.a_max);
    }
    const double warm = total_cost(in.plan, in.u_prev, in.initial, in.reference, in.predictions, p);
    EXPECT_LE(sol.objective, warm);
    for (std::size_t i = 1; i < sol.trace.size(); ++i) EXPECT_LE(sol.trace[i], sol.trace[i - 1]);
  }
}

TEST(SolveMpc, InvariantUnderRigidTranslation) {
  MpcParams p;
  std::mt19937_64 rng(13);
  // Dyadic coordinates keep the translated problem exactly representable.
  auto dyadic = [&rng](double lo, double hi) {
    std::uniform_int_distribution<int> d(static_cast<int>(lo * 64), static_cast<int>(hi * 64));
    return d(rng) / 64.0;
  };
  for (int trial = 0; trial < 10; ++trial) {
    const RobotState s{{dyadic(-2, 2), dyadic(-2, 2)}, {dyadic(-0.5, 0.5), dyadic(-0.5, 0.5)}};
    const Vec2 goal{dyadic(-4, 4), dyadic(-4, 4)};
    PredictedTrajectories pred = PredictedTrajectories::empty(p.horizon);
    const Vec2 ped{s.position.x + dyadic(-1, 1), s.position.y + dyadic(-1, 1)};
    for (std::size_t k = 0; k < p.horizon; ++k) pred.rows[k].push_back(ped + Vec2{0.125 * k, 0});
    const Vec2 shift{16.0, -32.0};
    RobotState s2 = s;
    s2.position += shift;
    PredictedTrajectories pred2 = pred;
    for (auto& row : pred2.rows) {
      for (auto& q : row) q += shift;
    }
    auto ref = reference_trajectory(s.position, goal, p.horizon, p.tau, p.v_max);
    for (auto& q : ref.points) q = {std::round(q.x * 1024) / 1024, std::round(q.y * 1024) / 1024};
    ReferencePath ref2 = ref;
    for (auto& q : ref2.points) q += shift;
    const auto a = solve_mpc(s, ControlAction{}, ref, pred, p, ControlPlan::zeros(p.horizon));
    const auto b = solve_mpc(s2, ControlAction{}, ref2, pred2, p, ControlPlan::zeros(p.horizon));
    EXPECT_LE(plan_distance(a.plan, b.plan), 1e-9);
  }
}

TEST(SolveMpc, VelocityStaysNearTheLimit) {
  MpcParams p;
  const RobotState s{{0, 0}, {0, 0}};
  const auto sol = solve_default(s, {0, 20}, PredictedTrajectories::empty(p.horizon), p);
  EXPECT_LE(sol.velocity_violation, p.velocity_tolerance);
}

TEST(SolveMpc, RejectsBadInputs) {
  MpcParams p;
  const RobotState s{{0, 0}, {0, 0}};
  const auto ref = reference_trajectory(s.position, {1, 0}, p.horizon, p.tau, p.v_max);
  const auto empty = PredictedTrajectories::empty(p.horizon);
  EXPECT_THROW(solve_mpc(s, {}, ref, empty, p, ControlPlan::zeros(p.horizon - 1)), DimensionError);
  EXPECT_THROW(solve_mpc(s, {}, ref, PredictedTrajectories::empty(3), p, ControlPlan::zeros(p.horizon)),
               DimensionError);
  ControlPlan outside = ControlPlan::zeros(p.horizon);
  outside.actions[2].accel = {2.5, 0};
  EXPECT_THROW(solve_mpc(s, {}, ref, empty, p, outside), SolverInputError);
  const RobotState bad{{std::nan(""), 0}, {0, 0}};
  EXPECT_THROW(solve_mpc(bad, {}, ref, empty, p, ControlPlan::zeros(p.horizon)), InvalidStateError);
}

}  // namespace
}  // namespace crowdmpc
