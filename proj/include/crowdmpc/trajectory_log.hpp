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

// Per-step simulation record and its JSONL serialisation.
//
// Schema "crowdmpc.trajectory", version 1. The first line is a header:
//   {"type":"header","schema":"crowdmpc.trajectory","version":1,
//    "scenario":"circle"|"square","seed":u64,"tau":s,
//    "robot_origin":[x,y],"robot_goal":[x,y],
//    "human_starts":[[x,y],...],"human_goals":[[x,y],...]}
// followed by one line per recorded step:
//   {"type":"step","k":int,"t":s,"robot":{"p":[x,y],"v":[x,y]},
//    "action":[ax,ay],"peds":[[x,y],...],"ped_vel":[[vx,vy],...],
//    "ibr_iterations":int,"ibr_converged":bool,"solve_s":s,"discomfort":bool}
// The terminal step carries a zero action and ibr_iterations 0.

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crowdmpc/dynamics.hpp"
#include "crowdmpc/error.hpp"
#include "crowdmpc/scenario.hpp"

namespace crowdmpc {

inline constexpr const char* kTrajectorySchema = "crowdmpc.trajectory";
inline constexpr int kTrajectorySchemaVersion = 1;

struct StepRecord {
  long step{0};
  double time{0.0};
  RobotState robot;
  ControlAction action;
  std::vector<Vec2> pedestrians;
  std::vector<Vec2> pedestrian_velocities;
  int ibr_iterations{0};
  bool ibr_converged{false};
  double solve_seconds{0.0};
  bool discomfort{false};
};

struct TrajectoryLog {
  std::string scenario_kind{"circle"};
  std::uint64_t seed{0};
  double tau{0.4};
  Scenario scenario;
  std::vector<StepRecord> records;
};

namespace detail {

inline nlohmann::json vec_json(const Vec2& v) { return nlohmann::json::array({v.x, v.y}); }

inline nlohmann::json vecs_json(const std::vector<Vec2>& vs) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& v : vs) a.push_back(vec_json(v));
  return a;
}

inline Vec2 json_vec(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw Error("trajectory log: expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline std::vector<Vec2> json_vecs(const nlohmann::json& j) {
  std::vector<Vec2> out;
  for (const auto& v : j) out.push_back(json_vec(v));
  return out;
}

}  // namespace detail

inline void write_jsonl(const TrajectoryLog& log, std::ostream& os) {
  using detail::vec_json;
  using detail::vecs_json;
  nlohmann::json header = {{"type", "header"},
                           {"schema", kTrajectorySchema},
                           {"version", kTrajectorySchemaVersion},
                           {"scenario", log.scenario_kind},
                           {"seed", log.seed},
                           {"tau", log.tau},
                           {"robot_origin", vec_json(log.scenario.robot_origin)},
                           {"robot_goal", vec_json(log.scenario.robot_goal)},
                           {"human_starts", vecs_json(log.scenario.human_starts)},
                           {"human_goals", vecs_json(log.scenario.human_goals)}};
  os << header.dump() << '\n';
  for (const auto& r : log.records) {
    nlohmann::json j = {{"type", "step"},
                        {"k", r.step},
                        {"t", r.time},
                        {"robot", {{"p", vec_json(r.robot.position)}, {"v", vec_json(r.robot.velocity)}}},
                        {"action", vec_json(r.action.accel)},
                        {"peds", vecs_json(r.pedestrians)},
                        {"ped_vel", vecs_json(r.pedestrian_velocities)},
                        {"ibr_iterations", r.ibr_iterations},
                        {"ibr_converged", r.ibr_converged},
                        {"solve_s", r.solve_seconds},
                        {"discomfort", r.discomfort}};
    os << j.dump() << '\n';
  }
}

inline TrajectoryLog read_jsonl(std::istream& is) {
  TrajectoryLog log;
  std::string line;
  bool have_header = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (type == "header") {
        if (j.at("schema").get<std::string>() != kTrajectorySchema) throw Error("trajectory log: unknown schema");
        if (j.at("version").get<int>() != kTrajectorySchemaVersion) {
          throw Error("trajectory log: unsupported version");
        }
        log.scenario_kind = j.at("scenario").get<std::string>();
        log.seed = j.at("seed").get<std::uint64_t>();
        log.tau = j.at("tau").get<double>();
        log.scenario.robot_origin = detail::json_vec(j.at("robot_origin"));
        log.scenario.robot_goal = detail::json_vec(j.at("robot_goal"));
        log.scenario.human_starts = detail::json_vecs(j.at("human_starts"));
        log.scenario.human_goals = detail::json_vecs(j.at("human_goals"));
        have_header = true;
      } else if (type == "step") {
        StepRecord r;
        r.step = j.at("k").get<long>();
        r.time = j.at("t").get<double>();
        r.robot.position = detail::json_vec(j.at("robot").at("p"));
        r.robot.velocity = detail::json_vec(j.at("robot").at("v"));
        r.action.accel = detail::json_vec(j.at("action"));
        r.pedestrians = detail::json_vecs(j.at("peds"));
        r.pedestrian_velocities = detail::json_vecs(j.at("ped_vel"));
        r.ibr_iterations = j.at("ibr_iterations").get<int>();
        r.ibr_converged = j.at("ibr_converged").get<bool>();
        r.solve_seconds = j.at("solve_s").get<double>();
        r.discomfort = j.at("discomfort").get<bool>();
        log.records.push_back(std::move(r));
      } else {
        throw Error("trajectory log: unknown record type '" + type + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(std::string("trajectory log: malformed line: ") + e.what());
    }
  }
  if (!have_header) throw Error("trajectory log: missing header line");
  return log;
}

}  // namespace crowdmpc
