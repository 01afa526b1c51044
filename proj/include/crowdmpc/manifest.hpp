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

// Batch run manifest. JSON object, every key optional:
//
//   {
//     "scenarios": ["circle", "square"],   // grid axis
//     "n_humans": [5],                     // grid axis
//     "horizons": [8],                     // grid axis, overrides mpc horizon
//     "seeds": 100,                        // runs per grid cell
//     "base_seed": 0,
//     "predictor": "constant_velocity" | "social_lstm",
//     "weights": "path/to/weights.json",   // required for social_lstm
//     "output_dir": "out",
//     "jobs": 1,
//     "write_logs": true,                  // one JSONL per run
//     "plots_per_cell": 1,                 // SVGs for the first runs of a cell
//     "mpc": { "tau": 0.4, "history": 8, "v_max": 1.0, "a_max": 2.0,
//              "d_min": 0.8, "rho": 0.5, "mu": 30, "w_goal": 10,
//              "w_acce": 0.1, "w_jerk": 0.1, "w_coll": 1e10, "w_vel": 1e4,
//              "tolerance": 1e-4, "max_iterations": 200, "lbfgs_memory": 10,
//              "velocity_tolerance": 1e-3, "restart_collision_cost": -1,
//              "restart_directions": 8 },
//     "ibr": { "j_max": 5, "epsilon": 0.01 },
//     "scenario": { "circle_radius": 4, "square_side": 10,
//                   "angular_jitter": 0.5, "human_radius": 0.3,
//                   "orca_margin": 0.05,
//                   "human_pref_speed": 1, "human_time_horizon": 5,
//                   "neighbor_distance": 10, "robot_radius": 0.5,
//                   "robot_visible": true, "goal_tolerance": 0.3,
//                   "collision_distance": 0.8, "discomfort_kappa": 1,
//                   "timeout": 30 }
//   }
//
// Unknown keys are rejected. Range errors name the offending key.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crowdmpc/error.hpp"
#include "crowdmpc/ibr.hpp"
#include "crowdmpc/mpc.hpp"
#include "crowdmpc/scenario.hpp"

namespace crowdmpc {

enum class PredictorChoice { ConstantVelocity, SocialLstm };

inline const char* to_string(PredictorChoice p) {
  return p == PredictorChoice::ConstantVelocity ? "constant_velocity" : "social_lstm";
}

struct RunManifest {
  std::vector<ScenarioKind> scenarios{ScenarioKind::CircleCrossing};
  std::vector<int> n_humans{5};
  std::vector<std::size_t> horizons{8};
  int seeds{100};
  std::uint64_t base_seed{0};
  PredictorChoice predictor{PredictorChoice::ConstantVelocity};
  std::string weights;
  std::string output_dir{"out"};
  int jobs{1};
  bool write_logs{true};
  int plots_per_cell{1};
  MpcParams mpc;
  IbrParams ibr;
  ScenarioConfig scenario;  // kind, n_humans and seed are set per run

  friend bool operator==(const RunManifest& a, const RunManifest& b);
};

namespace detail {

// One table drives parsing, validation and serialisation of numeric keys.
template <class Owner>
struct NumberField {
  const char* key;
  std::function<double(const Owner&)> get;
  std::function<void(Owner&, double)> set;
  enum class Range { Positive, NonNegative, Any, PositiveInt, NonNegativeInt } range;
};

template <class Owner, class T>
NumberField<Owner> number_field(const char* key, T Owner::*member, typename NumberField<Owner>::Range range) {
  return {key, [member](const Owner& o) { return static_cast<double>(o.*member); },
          [member](Owner& o, double v) { o.*member = static_cast<T>(v); }, range};
}

inline const std::vector<NumberField<MpcParams>>& mpc_fields() {
  using R = NumberField<MpcParams>::Range;
  static const std::vector<NumberField<MpcParams>> fields = {
      number_field("tau", &MpcParams::tau, R::Positive),
      number_field("history", &MpcParams::history, R::PositiveInt),
      number_field("v_max", &MpcParams::v_max, R::Positive),
      number_field("a_max", &MpcParams::a_max, R::Positive),
      number_field("d_min", &MpcParams::d_min, R::Positive),
      number_field("rho", &MpcParams::rho, R::NonNegative),
      number_field("mu", &MpcParams::mu, R::Positive),
      number_field("w_goal", &MpcParams::w_goal, R::NonNegative),
      number_field("w_acce", &MpcParams::w_acce, R::NonNegative),
      number_field("w_jerk", &MpcParams::w_jerk, R::NonNegative),
      number_field("w_coll", &MpcParams::w_coll, R::NonNegative),
      number_field("w_vel", &MpcParams::w_vel, R::NonNegative),
      number_field("tolerance", &MpcParams::tolerance, R::Positive),
      number_field("max_iterations", &MpcParams::max_iterations, R::PositiveInt),
      number_field("lbfgs_memory", &MpcParams::lbfgs_memory, R::NonNegativeInt),
      number_field("velocity_tolerance", &MpcParams::velocity_tolerance, R::Positive),
      number_field("restart_collision_cost", &MpcParams::restart_collision_cost, R::Any),
      number_field("restart_directions", &MpcParams::restart_directions, R::NonNegativeInt),
  };
  return fields;
}

inline const std::vector<NumberField<ScenarioConfig>>& scenario_fields() {
  using R = NumberField<ScenarioConfig>::Range;
  static const std::vector<NumberField<ScenarioConfig>> fields = {
      number_field("circle_radius", &ScenarioConfig::circle_radius, R::Positive),
      number_field("square_side", &ScenarioConfig::square_side, R::Positive),
      number_field("angular_jitter", &ScenarioConfig::angular_jitter, R::NonNegative),
      number_field("human_radius", &ScenarioConfig::human_radius, R::Positive),
      number_field("orca_margin", &ScenarioConfig::orca_margin, R::NonNegative),
      number_field("human_pref_speed", &ScenarioConfig::human_pref_speed, R::Positive),
      number_field("human_time_horizon", &ScenarioConfig::human_time_horizon, R::Positive),
      number_field("neighbor_distance", &ScenarioConfig::neighbor_distance, R::Positive),
      number_field("robot_radius", &ScenarioConfig::robot_radius, R::Positive),
      number_field("goal_tolerance", &ScenarioConfig::goal_tolerance, R::Positive),
      number_field("collision_distance", &ScenarioConfig::collision_distance, R::Positive),
      number_field("discomfort_kappa", &ScenarioConfig::discomfort_kappa, R::Positive),
      number_field("timeout", &ScenarioConfig::timeout, R::Positive),
  };
  return fields;
}

inline const std::vector<NumberField<IbrParams>>& ibr_fields() {
  using R = NumberField<IbrParams>::Range;
  static const std::vector<NumberField<IbrParams>> fields = {
      number_field("j_max", &IbrParams::j_max, R::PositiveInt),
      number_field("epsilon", &IbrParams::epsilon, R::NonNegative),
  };
  return fields;
}

template <class Range>
void check_range(const std::string& key, double v, Range range) {
  auto fail = [&](const char* what) {
    std::ostringstream os;
    os << "manifest: '" << key << "' " << what << " (got " << v << ")";
    throw ManifestError(os.str());
  };
  if (!std::isfinite(v)) fail("must be finite");
  switch (range) {
    case Range::Positive:
      if (!(v > 0.0)) fail("must be positive");
      break;
    case Range::NonNegative:
      if (v < 0.0) fail("must be non-negative");
      break;
    case Range::PositiveInt:
      if (!(v >= 1.0) || v != std::floor(v)) fail("must be a positive integer");
      break;
    case Range::NonNegativeInt:
      if (v < 0.0 || v != std::floor(v)) fail("must be a non-negative integer");
      break;
    case Range::Any:
      break;
  }
}

template <class Owner>
void parse_section(const nlohmann::json& j, const char* section, const std::vector<NumberField<Owner>>& fields,
                   Owner& out, const std::vector<std::string>& extra_keys = {}) {
  if (!j.is_object()) throw ManifestError(std::string("manifest: '") + section + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const auto& f : fields) known = known || it.key() == f.key;
    for (const auto& k : extra_keys) known = known || it.key() == k;
    if (!known) throw ManifestError(std::string("manifest: unknown key '") + section + "." + it.key() + "'");
  }
  for (const auto& f : fields) {
    if (!j.contains(f.key)) continue;
    const auto& v = j.at(f.key);
    if (!v.is_number()) throw ManifestError(std::string("manifest: '") + f.key + "' must be a number");
    const double x = v.template get<double>();
    check_range(f.key, x, f.range);
    f.set(out, x);
  }
}

template <class Owner>
nlohmann::json dump_section(const std::vector<NumberField<Owner>>& fields, const Owner& o) {
  using R = typename NumberField<Owner>::Range;
  nlohmann::json j = nlohmann::json::object();
  for (const auto& f : fields) {
    const double v = f.get(o);
    if (f.range == R::PositiveInt || f.range == R::NonNegativeInt) {
      j[f.key] = static_cast<long long>(v);
    } else {
      j[f.key] = v;
    }
  }
  return j;
}

template <class T>
std::vector<T> int_list(const nlohmann::json& j, const char* key, long long min_value) {
  if (!j.is_array() || j.empty()) throw ManifestError(std::string("manifest: '") + key + "' must be a non-empty list");
  std::vector<T> out;
  for (const auto& v : j) {
    if (!v.is_number_integer() || v.get<long long>() < min_value) {
      throw ManifestError(std::string("manifest: '") + key + "' entries must be integers >= " +
                          std::to_string(min_value));
    }
    out.push_back(static_cast<T>(v.get<long long>()));
  }
  return out;
}

}  // namespace detail

/// Rejects values the JSON layer cannot express as ranges (cross-field rules).
inline void validate(const RunManifest& m) {
  if (m.scenarios.empty()) throw ManifestError("manifest: 'scenarios' must be a non-empty list");
  if (m.n_humans.empty()) throw ManifestError("manifest: 'n_humans' must be a non-empty list");
  if (m.horizons.empty()) throw ManifestError("manifest: 'horizons' must be a non-empty list");
  for (int n : m.n_humans) {
    if (n < 0) throw ManifestError("manifest: 'n_humans' entries must be integers >= 0");
  }
  for (auto h : m.horizons) {
    if (h < 1) throw ManifestError("manifest: 'horizons' entries must be integers >= 1");
  }
  if (m.seeds < 1) throw ManifestError("manifest: 'seeds' must be at least 1");
  if (m.jobs < 1) throw ManifestError("manifest: 'jobs' must be at least 1");
  if (m.plots_per_cell < 0) throw ManifestError("manifest: 'plots_per_cell' must be non-negative");
  if (m.predictor == PredictorChoice::SocialLstm) {
    if (m.weights.empty()) throw ManifestError("manifest: 'weights' is required for the social_lstm predictor");
    if (!std::filesystem::exists(m.weights)) {
      throw ManifestError("manifest: 'weights' file does not exist: " + m.weights);
    }
  }
  for (const auto& f : detail::mpc_fields()) detail::check_range(f.key, f.get(m.mpc), f.range);
  for (const auto& f : detail::ibr_fields()) detail::check_range(f.key, f.get(m.ibr), f.range);
  for (const auto& f : detail::scenario_fields()) detail::check_range(f.key, f.get(m.scenario), f.range);
}

/// `base_dir` resolves a relative weight path against the manifest's folder.
inline RunManifest manifest_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  RunManifest m;
  if (j.is_null()) {
    validate(m);
    return m;
  }
  if (!j.is_object()) throw ManifestError("manifest: top level must be a JSON object");
  static const std::vector<std::string> known = {"scenarios", "n_humans",   "horizons",   "seeds",
                                                 "base_seed", "predictor",  "weights",    "output_dir",
                                                 "jobs",      "write_logs", "plots_per_cell", "mpc",
                                                 "ibr",       "scenario"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const auto& k : known) ok = ok || it.key() == k;
    if (!ok) throw ManifestError("manifest: unknown key '" + it.key() + "'");
  }
  try {
    if (j.contains("scenarios")) {
      const auto& s = j.at("scenarios");
      if (!s.is_array() || s.empty()) throw ManifestError("manifest: 'scenarios' must be a non-empty list");
      m.scenarios.clear();
      for (const auto& v : s) {
        try {
          m.scenarios.push_back(scenario_kind_from_string(v.get<std::string>()));
        } catch (const ScenarioError& e) {
          throw ManifestError(std::string("manifest: 'scenarios': ") + e.what());
        }
      }
    }
    if (j.contains("n_humans")) m.n_humans = detail::int_list<int>(j.at("n_humans"), "n_humans", 0);
    if (j.contains("horizons")) m.horizons = detail::int_list<std::size_t>(j.at("horizons"), "horizons", 1);
    if (j.contains("seeds")) {
      if (!j.at("seeds").is_number_integer() || j.at("seeds").get<long long>() < 1) {
        throw ManifestError("manifest: 'seeds' must be an integer >= 1");
      }
      m.seeds = j.at("seeds").get<int>();
    }
    if (j.contains("base_seed")) {
      if (!j.at("base_seed").is_number_unsigned()) throw ManifestError("manifest: 'base_seed' must be an unsigned integer");
      m.base_seed = j.at("base_seed").get<std::uint64_t>();
    }
    if (j.contains("predictor")) {
      const auto p = j.at("predictor").get<std::string>();
      if (p == "constant_velocity") {
        m.predictor = PredictorChoice::ConstantVelocity;
      } else if (p == "social_lstm") {
        m.predictor = PredictorChoice::SocialLstm;
      } else {
        throw ManifestError("manifest: 'predictor' must be constant_velocity or social_lstm (got '" + p + "')");
      }
    }
    if (j.contains("weights")) {
      std::filesystem::path w = j.at("weights").get<std::string>();
      if (w.is_relative() && !base_dir.empty()) w = base_dir / w;
      m.weights = w.string();
    }
    if (j.contains("output_dir")) m.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("jobs")) {
      if (!j.at("jobs").is_number_integer() || j.at("jobs").get<long long>() < 1) {
        throw ManifestError("manifest: 'jobs' must be an integer >= 1");
      }
      m.jobs = j.at("jobs").get<int>();
    }
    if (j.contains("write_logs")) m.write_logs = j.at("write_logs").get<bool>();
    if (j.contains("plots_per_cell")) {
      if (!j.at("plots_per_cell").is_number_integer() || j.at("plots_per_cell").get<long long>() < 0) {
        throw ManifestError("manifest: 'plots_per_cell' must be an integer >= 0");
      }
      m.plots_per_cell = j.at("plots_per_cell").get<int>();
    }
    if (j.contains("mpc")) detail::parse_section(j.at("mpc"), "mpc", detail::mpc_fields(), m.mpc);
    if (j.contains("ibr")) detail::parse_section(j.at("ibr"), "ibr", detail::ibr_fields(), m.ibr);
    if (j.contains("scenario")) {
      const auto& s = j.at("scenario");
      detail::parse_section(s, "scenario", detail::scenario_fields(), m.scenario, {"robot_visible"});
      if (s.contains("robot_visible")) m.scenario.robot_visible = s.at("robot_visible").get<bool>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ManifestError(std::string("manifest: wrong value type: ") + e.what());
  }
  m.mpc.horizon = m.horizons.front();
  validate(m);
  return m;
}

inline nlohmann::json manifest_to_json(const RunManifest& m) {
  nlohmann::json j;
  j["scenarios"] = nlohmann::json::array();
  for (auto k : m.scenarios) j["scenarios"].push_back(to_string(k));
  j["n_humans"] = m.n_humans;
  j["horizons"] = m.horizons;
  j["seeds"] = m.seeds;
  j["base_seed"] = m.base_seed;
  j["predictor"] = to_string(m.predictor);
  if (!m.weights.empty()) j["weights"] = m.weights;
  j["output_dir"] = m.output_dir;
  j["jobs"] = m.jobs;
  j["write_logs"] = m.write_logs;
  j["plots_per_cell"] = m.plots_per_cell;
  j["mpc"] = detail::dump_section(detail::mpc_fields(), m.mpc);
  j["ibr"] = detail::dump_section(detail::ibr_fields(), m.ibr);
  j["scenario"] = detail::dump_section(detail::scenario_fields(), m.scenario);
  j["scenario"]["robot_visible"] = m.scenario.robot_visible;
  return j;
}

inline bool operator==(const RunManifest& a, const RunManifest& b) {
  return manifest_to_json(a) == manifest_to_json(b);
}

inline RunManifest parse_manifest_string(const std::string& text, const std::filesystem::path& base_dir = {}) {
  bool blank = true;
  for (char c : text) blank = blank && std::isspace(static_cast<unsigned char>(c));
  if (blank) return manifest_from_json(nlohmann::json(), base_dir);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ManifestError(std::string("manifest: invalid JSON: ") + e.what());
  }
  return manifest_from_json(j, base_dir);
}

inline RunManifest parse_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ManifestError("manifest: cannot open " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_manifest_string(text, path.parent_path());
}

}  // namespace crowdmpc
