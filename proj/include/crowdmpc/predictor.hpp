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

// Pedestrian trajectory prediction.
//
// A predictor maps a window of past positions of every agent (index 0 is the
// robot) to one next-step position per pedestrian. Horizon predictions are
// produced recursively: predicted pedestrian positions are fed back into the
// window together with the robot's *planned* position, and the predictor's
// own guess for the robot is ignored.

#include <cmath>
#include <cstddef>
#include <deque>
#include <memory>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "crowdmpc/error.hpp"
#include "crowdmpc/lstm_weights.hpp"
#include "crowdmpc/vec2.hpp"

namespace crowdmpc {

/// Rolling window of the most recent positions of the robot and all
/// pedestrians, oldest first. A window created from a single observation is
/// left-padded by repeating it, so it always holds `length()` frames.
class WorldHistory {
 public:
  using Frame = std::vector<Vec2>;

  WorldHistory(std::size_t length, Frame first) {
    if (length < 1) throw DimensionError("WorldHistory: window length must be >= 1");
    check_frame(first, first.size());
    frames_.assign(length, std::move(first));
  }

  /// Builds a window from explicit frames. Fewer than `length` frames are
  /// left-padded with the oldest one.
  WorldHistory(std::size_t length, const std::vector<Frame>& frames) {
    if (length < 1) throw DimensionError("WorldHistory: window length must be >= 1");
    if (frames.empty()) throw DimensionError("WorldHistory: no frames");
    const std::size_t agents = frames.front().size();
    for (const auto& f : frames) check_frame(f, agents);
    const std::size_t keep = std::min(length, frames.size());
    for (std::size_t i = keep; i < length; ++i) frames_.push_back(frames[frames.size() - keep]);
    for (std::size_t i = frames.size() - keep; i < frames.size(); ++i) frames_.push_back(frames[i]);
  }

  void push(Frame frame) {
    check_frame(frame, agent_count());
    frames_.pop_front();
    frames_.push_back(std::move(frame));
  }

  std::size_t length() const { return frames_.size(); }
  std::size_t agent_count() const { return frames_.front().size(); }
  std::size_t pedestrian_count() const { return agent_count() - 1; }

  const Frame& frame(std::size_t t) const { return frames_[t]; }
  const Frame& newest() const { return frames_.back(); }
  const std::deque<Frame>& frames() const { return frames_; }

 private:
  static void check_frame(const Frame& f, std::size_t agents) {
    if (f.empty()) throw DimensionError("WorldHistory: frame must contain the robot");
    if (f.size() != agents) throw DimensionError("WorldHistory: frames are not rectangular");
    for (const auto& p : f) {
      if (!is_finite(p)) throw InvalidStateError("WorldHistory: non-finite position");
    }
  }

  std::deque<Frame> frames_;
};

/// Pedestrian positions over the horizon; rows[h][i] is pedestrian i+1 at
/// step h+1 ahead.
struct PredictedTrajectories {
  std::vector<std::vector<Vec2>> rows;

  std::size_t horizon() const { return rows.size(); }
  std::size_t pedestrian_count() const { return rows.empty() ? 0 : rows.front().size(); }
  const Vec2& at(std::size_t h, std::size_t i) const { return rows[h][i]; }

  static PredictedTrajectories empty(std::size_t horizon) {
    return PredictedTrajectories{std::vector<std::vector<Vec2>>(horizon)};
  }
};

struct ConstantVelocity {};

struct SocialLstm {
  std::shared_ptr<const LstmWeights> weights;
};

using PredictorKind = std::variant<ConstantVelocity, SocialLstm>;

namespace detail {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Holds the previous step's displacement, so the next position is 2*s_k - s_{k-1}.
inline std::vector<Vec2> predict_constant_velocity(const WorldHistory& window) {
  const std::size_t n = window.pedestrian_count();
  const auto& last = window.newest();
  const auto& prev = window.length() >= 2 ? window.frame(window.length() - 2) : last;
  std::vector<Vec2> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = 2.0 * last[i + 1] - prev[i + 1];
  return out;
}

/// Runs the shared-weight LSTM over the window for every agent, pooling the
/// previous hidden states of neighbours on a grid centred on each agent.
inline std::vector<Vec2> predict_social_lstm(const LstmWeights& w, const WorldHistory& window) {
  const std::size_t agents = window.agent_count();
  const std::size_t hidden = w.hidden_size;
  const std::size_t grid = w.grid;
  const std::size_t embed = w.input_embedding.rows;
  const std::size_t pool_embed = w.pool_embedding.rows;
  const std::size_t gates = 4 * hidden;
  const double cell = w.extent_m / static_cast<double>(grid);
  const double half = 0.5 * w.extent_m;

  std::vector<std::vector<double>> h(agents, std::vector<double>(hidden, 0.0));
  std::vector<std::vector<double>> c(agents, std::vector<double>(hidden, 0.0));
  std::vector<std::vector<double>> h_next = h;
  std::vector<double> input(embed + pool_embed);
  std::vector<double> pre(gates);

  for (std::size_t t = 0; t < window.length(); ++t) {
    const auto& frame = window.frame(t);
    for (std::size_t a = 0; a < agents; ++a) {
      const Vec2 disp = t == 0 ? Vec2{} : frame[a] - window.frame(t - 1)[a];

      for (std::size_t r = 0; r < embed; ++r) {
        const double v = w.input_embedding.at(r, 0) * disp.x + w.input_embedding.at(r, 1) * disp.y +
                         w.input_embedding_bias[r];
        input[r] = v > 0.0 ? v : 0.0;
      }

      // Pool embedding computed sparsely: only occupied cells contribute.
      double* pooled = input.data() + embed;
      for (std::size_t r = 0; r < pool_embed; ++r) pooled[r] = w.pool_embedding_bias[r];
      for (std::size_t b = 0; b < agents; ++b) {
        if (b == a) continue;
        const Vec2 rel = frame[b] - frame[a];
        const double fx = std::floor((rel.x + half) / cell);
        const double fy = std::floor((rel.y + half) / cell);
        if (fx < 0.0 || fy < 0.0 || fx >= static_cast<double>(grid) || fy >= static_cast<double>(grid)) continue;
        const std::size_t col0 = (static_cast<std::size_t>(fy) * grid + static_cast<std::size_t>(fx)) * hidden;
        for (std::size_t r = 0; r < pool_embed; ++r) {
          const double* row = &w.pool_embedding.at(r, col0);
          double acc = 0.0;
          for (std::size_t j = 0; j < hidden; ++j) acc += row[j] * h[b][j];
          pooled[r] += acc;
        }
      }
      for (std::size_t r = 0; r < pool_embed; ++r) pooled[r] = pooled[r] > 0.0 ? pooled[r] : 0.0;

      for (std::size_t g = 0; g < gates; ++g) {
        double acc = w.lstm_bias[g];
        const double* wi = &w.lstm_input.at(g, 0);
        for (std::size_t j = 0; j < input.size(); ++j) acc += wi[j] * input[j];
        const double* wh = &w.lstm_hidden.at(g, 0);
        for (std::size_t j = 0; j < hidden; ++j) acc += wh[j] * h[a][j];
        pre[g] = acc;
      }
      // Gate order: input, forget, cell candidate, output.
      for (std::size_t j = 0; j < hidden; ++j) {
        const double ig = sigmoid(pre[j]);
        const double fg = sigmoid(pre[hidden + j]);
        const double gg = std::tanh(pre[2 * hidden + j]);
        const double og = sigmoid(pre[3 * hidden + j]);
        c[a][j] = fg * c[a][j] + ig * gg;
        h_next[a][j] = og * std::tanh(c[a][j]);
      }
    }
    std::swap(h, h_next);
  }

  const auto& last = window.newest();
  std::vector<Vec2> out(agents - 1);
  for (std::size_t a = 1; a < agents; ++a) {
    Vec2 disp{w.output_bias[0], w.output_bias[1]};
    for (std::size_t j = 0; j < hidden; ++j) {
      disp.x += w.output.at(0, j) * h[a][j];
      disp.y += w.output.at(1, j) * h[a][j];
    }
    out[a - 1] = last[a] + disp;
  }
  return out;
}

}  // namespace detail

/// One next-step position per pedestrian (the robot is never predicted).
inline std::vector<Vec2> predict_next(const PredictorKind& kind, const WorldHistory& window) {
  if (window.pedestrian_count() == 0) return {};
  return std::visit(
      [&](const auto& k) -> std::vector<Vec2> {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, ConstantVelocity>) {
          return detail::predict_constant_velocity(window);
        } else {
          if (!k.weights) throw WeightError("predict_next: SocialLstm has no weights");
          return detail::predict_social_lstm(*k.weights, window);
        }
      },
      kind);
}

/// Recursive horizon prediction. After each step the window is advanced
/// with the predicted pedestrians and the supplied planned robot position.
inline PredictedTrajectories rollout_predictions(const PredictorKind& kind, WorldHistory window,
                                                 std::span<const Vec2> robot_plan_positions) {
  PredictedTrajectories out;
  out.rows.reserve(robot_plan_positions.size());
  for (const Vec2& robot : robot_plan_positions) {
    std::vector<Vec2> peds = predict_next(kind, window);
    WorldHistory::Frame frame;
    frame.reserve(peds.size() + 1);
    frame.push_back(robot);
    frame.insert(frame.end(), peds.begin(), peds.end());
    window.push(std::move(frame));
    out.rows.push_back(std::move(peds));
  }
  return out;
}

}  // namespace crowdmpc
