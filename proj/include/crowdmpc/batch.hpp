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

// Seeded batch sweeps over (scenario, crowd size, horizon) grids.
//
// Output directory layout:
//   metrics.csv   one row per grid cell, outcome rates and travel time
//   compute.csv   one row per grid cell, wall-clock solve time and IBR stats
//   errors.csv    only when some run failed
//   logs/<scenario>_n<N>_h<H>_<index>.jsonl
//   plots/<scenario>_n<N>_h<H>_<index>.svg
//
// metrics.csv depends only on the manifest; timing lives in compute.csv so
// reruns can be compared byte for byte.

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "crowdmpc/manifest.hpp"
#include "crowdmpc/metrics.hpp"
#include "crowdmpc/predictor.hpp"
#include "crowdmpc/simulation.hpp"
#include "crowdmpc/svg.hpp"
#include "crowdmpc/trajectory_log.hpp"

namespace crowdmpc {

struct CellKey {
  ScenarioKind kind{ScenarioKind::CircleCrossing};
  int n_humans{0};
  std::size_t horizon{8};

  friend bool operator==(const CellKey&, const CellKey&) = default;
};

struct RunRecord {
  CellKey cell;
  int index{0};
  std::uint64_t seed{0};
  std::optional<SimOutcome> outcome;
  std::string error;  // set when the run threw
};

struct CellSummary {
  CellKey key;
  std::size_t errors{0};
  std::optional<MetricsSummary> metrics;  // empty when every run failed
};

struct BatchResult {
  std::vector<CellSummary> cells;
  std::vector<RunRecord> runs;
  std::size_t errored_runs{0};
};

struct BatchOptions {
  bool write_artifacts{true};
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::string run_stem(const CellKey& c, int index) {
  return to_string(c.kind) + "_n" + std::to_string(c.n_humans) + "_h" + std::to_string(c.horizon) + "_" +
         std::to_string(index);
}

inline std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace detail

/// Per-run seed. The horizon is deliberately left out so a horizon sweep
/// replays the same scenarios.
inline std::uint64_t derive_seed(std::uint64_t base_seed, ScenarioKind kind, int n_humans, int index) {
  std::uint64_t h = detail::splitmix64(base_seed);
  h = detail::splitmix64(h ^ static_cast<std::uint64_t>(kind == ScenarioKind::CircleCrossing ? 1 : 2));
  h = detail::splitmix64(h ^ static_cast<std::uint64_t>(n_humans));
  return detail::splitmix64(h ^ static_cast<std::uint64_t>(index));
}

inline PredictorKind make_predictor(const RunManifest& m) {
  if (m.predictor == PredictorChoice::SocialLstm) {
    return SocialLstm{std::make_shared<const LstmWeights>(load_weights(m.weights))};
  }
  return ConstantVelocity{};
}

inline void write_metrics_csv(const std::vector<CellSummary>& cells, std::ostream& os) {
  os << "scenario,n_humans,horizon,runs,errors,successes,collisions,timeouts,"
        "success_pct,collision_pct,timeout_pct,discomfort_pct,avg_time_s\n";
  for (const auto& c : cells) {
    os << to_string(c.key.kind) << ',' << c.key.n_humans << ',' << c.key.horizon << ',';
    if (!c.metrics) {
      os << 0 << ',' << c.errors << ",0,0,0,,,,,\n";
      continue;
    }
    const MetricsSummary& m = *c.metrics;
    os << m.runs << ',' << c.errors << ',' << m.successes << ',' << m.collisions << ',' << m.timeouts << ','
       << detail::fixed(m.success_rate, 4) << ',' << detail::fixed(m.collision_rate, 4) << ','
       << detail::fixed(m.timeout_rate, 4) << ',' << detail::fixed(m.discomfort_rate, 4) << ','
       << (m.avg_travel_time ? detail::fixed(*m.avg_travel_time, 4) : std::string()) << '\n';
  }
}

inline void write_compute_csv(const std::vector<CellSummary>& cells, std::ostream& os) {
  os << "scenario,n_humans,horizon,mean_step_compute_s,ibr_steps,ibr_converged_pct\n";
  for (const auto& c : cells) {
    os << to_string(c.key.kind) << ',' << c.key.n_humans << ',' << c.key.horizon << ',';
    if (!c.metrics) {
      os << ",0,\n";
      continue;
    }
    const MetricsSummary& m = *c.metrics;
    const double conv =
        m.ibr_steps ? 100.0 * static_cast<double>(m.ibr_converged_steps) / static_cast<double>(m.ibr_steps) : 0.0;
    os << detail::fixed(m.mean_step_compute, 6) << ',' << m.ibr_steps << ',' << detail::fixed(conv, 4) << '\n';
  }
}

inline BatchResult run_batch(const RunManifest& manifest, const BatchOptions& options = {}) {
  validate(manifest);
  const PredictorKind predictor = make_predictor(manifest);
  const std::filesystem::path out_dir = manifest.output_dir;
  if (options.write_artifacts) {
    std::filesystem::create_directories(out_dir);
    if (manifest.write_logs) std::filesystem::create_directories(out_dir / "logs");
    if (manifest.plots_per_cell > 0) std::filesystem::create_directories(out_dir / "plots");
  }

  BatchResult result;
  for (auto kind : manifest.scenarios) {
    for (int n : manifest.n_humans) {
      for (auto h : manifest.horizons) {
        const CellKey key{kind, n, h};
        result.cells.push_back({key, 0, std::nullopt});
        for (int i = 0; i < manifest.seeds; ++i) {
          result.runs.push_back({key, i, derive_seed(manifest.base_seed, kind, n, i), std::nullopt, {}});
        }
      }
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < result.runs.size(); t = next++) {
      RunRecord& run = result.runs[t];
      try {
        ScenarioConfig config = manifest.scenario;
        config.kind = run.cell.kind;
        config.n_humans = run.cell.n_humans;
        config.seed = run.seed;
        MpcParams mpc = manifest.mpc;
        mpc.horizon = run.cell.horizon;
        SimResult sim = run_simulation(config, predictor, mpc, manifest.ibr);
        if (options.write_artifacts) {
          const std::string stem = detail::run_stem(run.cell, run.index);
          if (manifest.write_logs) {
            std::ofstream log_file(out_dir / "logs" / (stem + ".jsonl"));
            if (!log_file) throw Error("cannot write log for " + stem);
            write_jsonl(sim.log, log_file);
          }
          if (run.index < manifest.plots_per_cell) emit_plot(sim.log, out_dir / "plots" / (stem + ".svg"));
        }
        run.outcome = std::move(sim.outcome);
      } catch (const std::exception& e) {
        run.error = e.what();
      }
    }
  };
  const auto jobs = static_cast<std::size_t>(std::max(1, manifest.jobs));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  // Runs are stored in grid order, so each cell is a contiguous block.
  const auto per_cell = static_cast<std::size_t>(manifest.seeds);
  for (std::size_t c = 0; c < result.cells.size(); ++c) {
    std::vector<SimOutcome> outcomes;
    for (std::size_t r = c * per_cell; r < (c + 1) * per_cell; ++r) {
      if (result.runs[r].outcome) {
        outcomes.push_back(*result.runs[r].outcome);
      } else {
        ++result.cells[c].errors;
        ++result.errored_runs;
      }
    }
    if (!outcomes.empty()) result.cells[c].metrics = compute_metrics(outcomes);
  }

  if (options.write_artifacts) {
    std::ofstream metrics(out_dir / "metrics.csv");
    std::ofstream compute(out_dir / "compute.csv");
    if (!metrics || !compute) throw Error("run_batch: cannot write CSV files in " + out_dir.string());
    write_metrics_csv(result.cells, metrics);
    write_compute_csv(result.cells, compute);
    if (result.errored_runs > 0) {
      std::ofstream errors(out_dir / "errors.csv");
      errors << "scenario,n_humans,horizon,index,seed,error\n";
      for (const auto& r : result.runs) {
        if (r.outcome) continue;
        std::string msg = r.error;
        for (char& ch : msg) {
          if (ch == '"') ch = '\'';
          if (ch == '\n') ch = ' ';
        }
        errors << to_string(r.cell.kind) << ',' << r.cell.n_humans << ',' << r.cell.horizon << ',' << r.index << ','
               << r.seed << ",\"" << msg << "\"\n";
      }
    }
  }
  return result;
}

}  // namespace crowdmpc
