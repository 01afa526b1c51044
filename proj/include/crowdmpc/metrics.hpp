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

#include <cstddef>
#include <optional>
#include <span>

#include "crowdmpc/error.hpp"
#include "crowdmpc/simulation.hpp"

namespace crowdmpc {

/// Batch-level rates in percent. Discomfort counts a run once if any of its
/// steps was uncomfortable; travel time averages successful runs only.
struct MetricsSummary {
  std::size_t runs{0};
  std::size_t successes{0};
  std::size_t collisions{0};
  std::size_t timeouts{0};
  std::size_t uncomfortable_runs{0};
  double success_rate{0.0};
  double collision_rate{0.0};
  double timeout_rate{0.0};
  double discomfort_rate{0.0};
  std::optional<double> avg_travel_time;
  double mean_step_compute{0.0};
  std::size_t ibr_steps{0};
  std::size_t ibr_converged_steps{0};
};

inline MetricsSummary compute_metrics(std::span<const SimOutcome> outcomes) {
  if (outcomes.empty()) throw Error("compute_metrics: empty batch");
  MetricsSummary m;
  m.runs = outcomes.size();
  double time_sum = 0.0;
  double compute_sum = 0.0;
  std::size_t compute_count = 0;
  for (const auto& o : outcomes) {
    switch (o.status) {
      case SimStatus::Success:
        ++m.successes;
        time_sum += o.travel_time;
        break;
      case SimStatus::Collision:
        ++m.collisions;
        break;
      case SimStatus::Timeout:
        ++m.timeouts;
        break;
    }
    if (o.discomfort_steps > 0) ++m.uncomfortable_runs;
    for (double c : o.step_compute_times) compute_sum += c;
    compute_count += o.step_compute_times.size();
    m.ibr_steps += static_cast<std::size_t>(o.ibr_steps);
    m.ibr_converged_steps += static_cast<std::size_t>(o.ibr_converged_steps);
  }
  const double runs = static_cast<double>(m.runs);
  m.success_rate = 100.0 * static_cast<double>(m.successes) / runs;
  m.collision_rate = 100.0 * static_cast<double>(m.collisions) / runs;
  m.timeout_rate = 100.0 * static_cast<double>(m.timeouts) / runs;
  m.discomfort_rate = 100.0 * static_cast<double>(m.uncomfortable_runs) / runs;
  if (m.successes > 0) m.avg_travel_time = time_sum / static_cast<double>(m.successes);
  if (compute_count > 0) m.mean_step_compute = compute_sum / static_cast<double>(compute_count);
  return m;
}

}  // namespace crowdmpc
