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

#include <cmath>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "crowdmpc/metrics.hpp"
#include "crowdmpc/simulation.hpp"

namespace crowdmpc {
namespace {

ScenarioConfig circle(int n, std::uint64_t seed) {
  ScenarioConfig c;
  c.n_humans = n;
  c.seed = seed;
  return c;
}

SimOutcome outcome(SimStatus s, double t = 0.0) {
  SimOutcome o;
  o.status = s;
  o.travel_time = t;
  return o;
}

TEST(Discomfort, CrossingSegments) {
  EXPECT_TRUE(discomfort_check(RobotState{{0, 0}, {1, 0}}, {0.5, -0.5}, {0, 1}));
}

TEST(Discomfort, ParallelOffsetPaths) {
  EXPECT_FALSE(discomfort_check(RobotState{{0, 0}, {1, 0}}, {0, 1}, {1, 0}));
}

TEST(Discomfort, StationaryAgents) {
  EXPECT_FALSE(discomfort_check(RobotState{{0, 0}, {0, 0}}, {0, 0}, {0, 0}));
  EXPECT_FALSE(discomfort_check(RobotState{{0, 0}, {1, 0}}, {0.5, 0}, {0, 0}));
}

TEST(Discomfort, KappaScalesTheSegments) {
  const RobotState robot{{0, 0}, {1, 0}};
  EXPECT_FALSE(discomfort_check(robot, {1.5, -0.5}, {0, 1}, 1.0));
  EXPECT_TRUE(discomfort_check(robot, {1.5, -0.5}, {0, 1}, 2.0));
}

TEST(Metrics, ArithmeticExample) {
  std::vector<SimOutcome> runs(99, outcome(SimStatus::Success, 12.0));
  runs.push_back(outcome(SimStatus::Collision, 3.0));
  const auto m = compute_metrics(runs);
  EXPECT_DOUBLE_EQ(m.success_rate, 99.0);
  EXPECT_DOUBLE_EQ(m.collision_rate, 1.0);
  EXPECT_DOUBLE_EQ(m.timeout_rate, 0.0);
  ASSERT_TRUE(m.avg_travel_time.has_value());
  EXPECT_DOUBLE_EQ(*m.avg_travel_time, 12.0);
}

TEST(Metrics, AverageTimeIgnoresFailures) {
  const std::vector<SimOutcome> runs{outcome(SimStatus::Success, 10.0), outcome(SimStatus::Success, 14.0),
                                     outcome(SimStatus::Collision, 1.0), outcome(SimStatus::Timeout, 30.0)};
  EXPECT_DOUBLE_EQ(*compute_metrics(runs).avg_travel_time, 12.0);
}

TEST(Metrics, AllTimeoutsHaveNoAverage) {
  const std::vector<SimOutcome> runs(4, outcome(SimStatus::Timeout, 30.0));
  const auto m = compute_metrics(runs);
  EXPECT_EQ(m.success_rate, 0.0);
  EXPECT_FALSE(m.avg_travel_time.has_value());
}

TEST(Metrics, DiscomfortCountsRunsNotSteps) {
  std::vector<SimOutcome> runs(4, outcome(SimStatus::Success, 10.0));
  runs[0].discomfort_steps = 7;
  runs[2].discomfort_steps = 1;
  EXPECT_DOUBLE_EQ(compute_metrics(runs).discomfort_rate, 50.0);
}

TEST(Metrics, RatesSumToOneHundred) {
  std::vector<SimOutcome> runs;
  for (int i = 0; i < 7; ++i) runs.push_back(outcome(static_cast<SimStatus>(i % 3), 5.0));
  const auto m = compute_metrics(runs);
  EXPECT_DOUBLE_EQ(m.success_rate + m.collision_rate + m.timeout_rate, 100.0);
  EXPECT_THROW(compute_metrics(std::vector<SimOutcome>{}), Error);
}

TEST(Simulation, EmptyCrowdThreeMetresAway) {
  ScenarioConfig c = circle(0, 0);
  c.circle_radius = 1.5;
  const auto r = run_simulation(c, ConstantVelocity{}, MpcParams{}, IbrParams{});
  EXPECT_EQ(r.outcome.status, SimStatus::Success);
  EXPECT_LE(r.outcome.travel_time, 4.5);
  EXPECT_GE(r.outcome.travel_time, 2.4);  // (3 m - goal tolerance) at top speed
  EXPECT_TRUE(std::isinf(r.outcome.min_separation));
}

TEST(Simulation, PedestrianOnTheRobotStartCollidesImmediately) {
  Scenario s;
  s.robot_origin = {0, -4};
  s.robot_goal = {0, 4};
  s.human_starts = {{0, -4}};
  s.human_goals = {{0, 4}};
  const auto r = run_simulation(s, circle(1, 0), ConstantVelocity{}, MpcParams{}, IbrParams{});
  EXPECT_EQ(r.outcome.status, SimStatus::Collision);
  EXPECT_EQ(r.outcome.travel_time, 0.0);
  EXPECT_EQ(r.log.records.size(), 1u);
  EXPECT_TRUE(r.outcome.step_compute_times.empty());
}

TEST(Simulation, ReferenceCircleRunWithSixPedestrians) {
  const auto r = run_simulation(circle(6, 0), ConstantVelocity{}, MpcParams{}, IbrParams{});
  EXPECT_EQ(r.outcome.status, SimStatus::Success);
  EXPECT_GE(r.outcome.travel_time, 10.0);
  EXPECT_LE(r.outcome.travel_time, 20.0);
}

TEST(Simulation, DeterministicLog) {
  const auto a = run_simulation(circle(5, 9), ConstantVelocity{}, MpcParams{}, IbrParams{});
  const auto b = run_simulation(circle(5, 9), ConstantVelocity{}, MpcParams{}, IbrParams{});
  ASSERT_EQ(a.log.records.size(), b.log.records.size());
  for (std::size_t k = 0; k < a.log.records.size(); ++k) {
    EXPECT_EQ(a.log.records[k].robot.position, b.log.records[k].robot.position);
    EXPECT_EQ(a.log.records[k].action.accel, b.log.records[k].action.accel);
    EXPECT_EQ(a.log.records[k].pedestrians, b.log.records[k].pedestrians);
  }
  EXPECT_EQ(a.outcome.status, b.outcome.status);
  EXPECT_EQ(a.outcome.travel_time, b.outcome.travel_time);
}

TEST(Simulation, LoggedTrajectoriesAreConsistent) {
  const MpcParams mpc;
  for (auto kind : {ScenarioKind::CircleCrossing, ScenarioKind::SquareCrossing}) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      ScenarioConfig c = circle(5, seed);
      c.kind = kind;
      const auto r = run_simulation(c, ConstantVelocity{}, mpc, IbrParams{});
      const auto& recs = r.log.records;
      ASSERT_FALSE(recs.empty());
      double min_sep = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < recs.size(); ++k) {
        for (const Vec2& p : recs[k].pedestrians) min_sep = std::min(min_sep, norm(p - recs[k].robot.position));
        EXPECT_EQ(recs[k].time, static_cast<double>(k) * mpc.tau);
        if (k + 1 == recs.size()) break;
        const RobotState next = step_dynamics(recs[k].robot, recs[k].action, mpc.tau);
        EXPECT_EQ(next.position, recs[k + 1].robot.position);
        for (std::size_t i = 0; i < recs[k].pedestrians.size(); ++i) {
          const Vec2 moved = recs[k + 1].pedestrians[i] - recs[k].pedestrians[i];
          const Vec2 expected = mpc.tau * recs[k + 1].pedestrian_velocities[i];
          EXPECT_NEAR(moved.x, expected.x, 1e-12);
          EXPECT_NEAR(moved.y, expected.y, 1e-12);
          EXPECT_LE(norm(recs[k + 1].pedestrian_velocities[i]), c.human_pref_speed + 1e-9);
        }
      }
      EXPECT_EQ(min_sep, r.outcome.min_separation);
      EXPECT_EQ(r.outcome.status == SimStatus::Collision, min_sep < c.collision_distance);
      EXPECT_LE(r.outcome.travel_time, c.timeout);
    }
  }
}

TEST(Simulation, RobotRespectsTheActuationBox) {
  const MpcParams mpc;
  const auto r = run_simulation(circle(5, 4), ConstantVelocity{}, mpc, IbrParams{});
  for (const auto& rec : r.log.records) {
    EXPECT_LE(std::abs(rec.action.accel.x), mpc.a_max);
    EXPECT_LE(std::abs(rec.action.accel.y), mpc.a_max);
    EXPECT_LE(std::abs(rec.robot.velocity.x), mpc.v_max + 0.05);
    EXPECT_LE(std::abs(rec.robot.velocity.y), mpc.v_max + 0.05);
  }
}

TEST(TrajectoryLog, JsonlRoundTrip) {
  const auto r = run_simulation(circle(3, 5), ConstantVelocity{}, MpcParams{}, IbrParams{});
  std::stringstream ss;
  write_jsonl(r.log, ss);
  const TrajectoryLog back = read_jsonl(ss);
  EXPECT_EQ(back.scenario, r.log.scenario);
  EXPECT_EQ(back.seed, r.log.seed);
  EXPECT_EQ(back.scenario_kind, "circle");
  ASSERT_EQ(back.records.size(), r.log.records.size());
  for (std::size_t k = 0; k < back.records.size(); ++k) {
    EXPECT_EQ(back.records[k].robot.position, r.log.records[k].robot.position);
    EXPECT_EQ(back.records[k].pedestrians, r.log.records[k].pedestrians);
    EXPECT_EQ(back.records[k].ibr_iterations, r.log.records[k].ibr_iterations);
  }
}

TEST(TrajectoryLog, RejectsMalformedInput) {
  std::stringstream missing_header("{\"type\":\"step\",\"k\":0}\n");
  EXPECT_THROW(read_jsonl(missing_header), Error);
  std::stringstream garbage("not json\n");
  EXPECT_THROW(read_jsonl(garbage), Error);
}

}  // namespace
}  // namespace crowdmpc
