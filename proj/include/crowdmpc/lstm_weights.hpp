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

// Social-LSTM weights and their JSON file format.
//
// File layout:
//   {"hidden_size": D, "grid": G, "extent_m": E,
//    "tensors": {name: {"shape": [...], "data": [... row-major ...]}}}
//
// Tensor names and shapes (K = input embedding width, P = pooling
// embedding width, both inferred from the file):
//   input_embedding.weight  [K, 2]        displacement -> embedding
//   input_embedding.bias    [K]
//   pool_embedding.weight   [P, G*G*D]    social pooling tensor -> embedding
//   pool_embedding.bias     [P]
//   lstm.weight_ih          [4D, K+P]     gates ordered input, forget, cell, output
//   lstm.weight_hh          [4D, D]
//   lstm.bias               [4D]
//   output.weight           [2, D]        hidden state -> next-step displacement
//   output.bias             [2]

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crowdmpc/error.hpp"

namespace crowdmpc {

/// Dense row-major matrix.
struct Matrix {
  std::size_t rows{0};
  std::size_t cols{0};
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  const double& at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

struct LstmWeights {
  std::size_t hidden_size{64};
  std::size_t grid{4};
  double extent_m{2.0};

  Matrix input_embedding;
  std::vector<double> input_embedding_bias;
  Matrix pool_embedding;
  std::vector<double> pool_embedding_bias;
  Matrix lstm_input;
  Matrix lstm_hidden;
  std::vector<double> lstm_bias;
  Matrix output;
  std::vector<double> output_bias;

  friend bool operator==(const LstmWeights&, const LstmWeights&) = default;

  /// Zero-filled weights with consistent shapes.
  static LstmWeights zeros(std::size_t hidden = 64, std::size_t grid = 4, double extent_m = 2.0,
                           std::size_t input_embed = 32, std::size_t pool_embed = 64) {
    LstmWeights w;
    w.hidden_size = hidden;
    w.grid = grid;
    w.extent_m = extent_m;
    w.input_embedding = Matrix(input_embed, 2);
    w.input_embedding_bias.assign(input_embed, 0.0);
    w.pool_embedding = Matrix(pool_embed, grid * grid * hidden);
    w.pool_embedding_bias.assign(pool_embed, 0.0);
    w.lstm_input = Matrix(4 * hidden, input_embed + pool_embed);
    w.lstm_hidden = Matrix(4 * hidden, hidden);
    w.lstm_bias.assign(4 * hidden, 0.0);
    w.output = Matrix(2, hidden);
    w.output_bias.assign(2, 0.0);
    return w;
  }

  /// Uniform(-scale, scale) initialisation; deterministic per seed.
  static LstmWeights random(std::uint64_t seed, double scale = 0.1, std::size_t hidden = 64, std::size_t grid = 4,
                            double extent_m = 2.0, std::size_t input_embed = 32, std::size_t pool_embed = 64) {
    LstmWeights w = zeros(hidden, grid, extent_m, input_embed, pool_embed);
    std::mt19937_64 rng(seed);
    auto draw = [&rng, scale] {
      return scale * (2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0);
    };
    auto fill = [&draw](std::vector<double>& v) {
      for (double& x : v) x = draw();
    };
    fill(w.input_embedding.data);
    fill(w.input_embedding_bias);
    fill(w.pool_embedding.data);
    fill(w.pool_embedding_bias);
    fill(w.lstm_input.data);
    fill(w.lstm_hidden.data);
    fill(w.lstm_bias);
    fill(w.output.data);
    fill(w.output_bias);
    return w;
  }
};

namespace detail {

struct NamedTensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;
};

inline void check_finite(const std::string& name, const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) throw WeightError("weights: tensor '" + name + "' has a non-finite entry");
  }
}

inline std::string shape_str(const std::vector<std::size_t>& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out + "]";
}

inline void expect_shape(const std::string& name, const std::vector<std::size_t>& got,
                         const std::vector<std::size_t>& want) {
  if (got != want) {
    throw WeightError("weights: tensor '" + name + "' has shape " + shape_str(got) + ", expected " +
                      shape_str(want));
  }
}

}  // namespace detail

/// Throws WeightError naming the first inconsistent or non-finite tensor.
inline void validate(const LstmWeights& w) {
  using detail::expect_shape;
  if (w.hidden_size == 0 || w.grid == 0) throw WeightError("weights: hidden_size and grid must be positive");
  if (!(w.extent_m > 0.0) || !std::isfinite(w.extent_m)) throw WeightError("weights: extent_m must be positive");
  const std::size_t d = w.hidden_size;
  const std::size_t k = w.input_embedding.rows;
  const std::size_t p = w.pool_embedding.rows;
  auto shp = [](const Matrix& m) { return std::vector<std::size_t>{m.rows, m.cols}; };
  auto vec = [](const std::vector<double>& v) { return std::vector<std::size_t>{v.size()}; };
  expect_shape("input_embedding.weight", shp(w.input_embedding), {k, 2});
  expect_shape("input_embedding.bias", vec(w.input_embedding_bias), {k});
  expect_shape("pool_embedding.weight", shp(w.pool_embedding), {p, w.grid * w.grid * d});
  expect_shape("pool_embedding.bias", vec(w.pool_embedding_bias), {p});
  expect_shape("lstm.weight_ih", shp(w.lstm_input), {4 * d, k + p});
  expect_shape("lstm.weight_hh", shp(w.lstm_hidden), {4 * d, d});
  expect_shape("lstm.bias", vec(w.lstm_bias), {4 * d});
  expect_shape("output.weight", shp(w.output), {2, d});
  expect_shape("output.bias", vec(w.output_bias), {2});
  for (const auto& [name, data] : std::vector<std::pair<std::string, const std::vector<double>*>>{
           {"input_embedding.weight", &w.input_embedding.data},
           {"input_embedding.bias", &w.input_embedding_bias},
           {"pool_embedding.weight", &w.pool_embedding.data},
           {"pool_embedding.bias", &w.pool_embedding_bias},
           {"lstm.weight_ih", &w.lstm_input.data},
           {"lstm.weight_hh", &w.lstm_hidden.data},
           {"lstm.bias", &w.lstm_bias},
           {"output.weight", &w.output.data},
           {"output.bias", &w.output_bias}}) {
    detail::check_finite(name, *data);
  }
}

inline nlohmann::json weights_to_json(const LstmWeights& w) {
  nlohmann::json tensors = nlohmann::json::object();
  auto put_m = [&tensors](const std::string& name, const Matrix& m) {
    tensors[name] = {{"shape", {m.rows, m.cols}}, {"data", m.data}};
  };
  auto put_v = [&tensors](const std::string& name, const std::vector<double>& v) {
    tensors[name] = {{"shape", {v.size()}}, {"data", v}};
  };
  put_m("input_embedding.weight", w.input_embedding);
  put_v("input_embedding.bias", w.input_embedding_bias);
  put_m("pool_embedding.weight", w.pool_embedding);
  put_v("pool_embedding.bias", w.pool_embedding_bias);
  put_m("lstm.weight_ih", w.lstm_input);
  put_m("lstm.weight_hh", w.lstm_hidden);
  put_v("lstm.bias", w.lstm_bias);
  put_m("output.weight", w.output);
  put_v("output.bias", w.output_bias);
  return {{"hidden_size", w.hidden_size}, {"grid", w.grid}, {"extent_m", w.extent_m}, {"tensors", tensors}};
}

inline LstmWeights weights_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw WeightError("weights: top level must be an object");
  for (const char* key : {"hidden_size", "grid", "extent_m", "tensors"}) {
    if (!j.contains(key)) throw WeightError(std::string("weights: missing key '") + key + "'");
  }
  for (const auto& [key, _] : j.items()) {
    if (key != "hidden_size" && key != "grid" && key != "extent_m" && key != "tensors") {
      throw WeightError("weights: unknown key '" + key + "'");
    }
  }
  if (!j["hidden_size"].is_number_unsigned() || !j["grid"].is_number_unsigned()) {
    throw WeightError("weights: hidden_size and grid must be non-negative integers");
  }
  if (!j["extent_m"].is_number()) throw WeightError("weights: extent_m must be a number");

  LstmWeights w;
  w.hidden_size = j["hidden_size"].get<std::size_t>();
  w.grid = j["grid"].get<std::size_t>();
  w.extent_m = j["extent_m"].get<double>();

  std::map<std::string, detail::NamedTensor> tensors;
  for (const auto& [name, t] : j["tensors"].items()) {
    if (!t.is_object() || !t.contains("shape") || !t.contains("data")) {
      throw WeightError("weights: tensor '" + name + "' needs 'shape' and 'data'");
    }
    detail::NamedTensor nt;
    for (const auto& s : t["shape"]) {
      if (!s.is_number_unsigned()) throw WeightError("weights: tensor '" + name + "' has a bad shape entry");
      nt.shape.push_back(s.get<std::size_t>());
    }
    std::size_t count = 1;
    for (auto s : nt.shape) count *= s;
    if (!t["data"].is_array()) throw WeightError("weights: tensor '" + name + "' data must be an array");
    nt.data.reserve(t["data"].size());
    for (const auto& x : t["data"]) {
      // NaN/inf serialize as null in JSON.
      if (!x.is_number()) throw WeightError("weights: tensor '" + name + "' has a non-finite entry");
      nt.data.push_back(x.get<double>());
    }
    if (nt.data.size() != count) {
      throw WeightError("weights: tensor '" + name + "' has " + std::to_string(nt.data.size()) +
                        " values for shape " + detail::shape_str(nt.shape));
    }
    detail::check_finite(name, nt.data);
    tensors.emplace(name, std::move(nt));
  }

  auto take = [&tensors](const std::string& name) {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw WeightError("weights: missing tensor '" + name + "'");
    auto t = std::move(it->second);
    tensors.erase(it);
    return t;
  };
  auto matrix = [&take](const std::string& name) {
    auto t = take(name);
    if (t.shape.size() != 2) throw WeightError("weights: tensor '" + name + "' must be 2-D");
    Matrix m;
    m.rows = t.shape[0];
    m.cols = t.shape[1];
    m.data = std::move(t.data);
    return m;
  };
  auto vector = [&take](const std::string& name) {
    auto t = take(name);
    if (t.shape.size() != 1) throw WeightError("weights: tensor '" + name + "' must be 1-D");
    return std::move(t.data);
  };
  w.input_embedding = matrix("input_embedding.weight");
  w.input_embedding_bias = vector("input_embedding.bias");
  w.pool_embedding = matrix("pool_embedding.weight");
  w.pool_embedding_bias = vector("pool_embedding.bias");
  w.lstm_input = matrix("lstm.weight_ih");
  w.lstm_hidden = matrix("lstm.weight_hh");
  w.lstm_bias = vector("lstm.bias");
  w.output = matrix("output.weight");
  w.output_bias = vector("output.bias");
  if (!tensors.empty()) throw WeightError("weights: unknown tensor '" + tensors.begin()->first + "'");

  validate(w);
  return w;
}

inline LstmWeights load_weights(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw WeightError("weights: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw WeightError("weights: '" + path + "' is not valid JSON: " + e.what());
  }
  return weights_from_json(j);
}

inline void save_weights(const LstmWeights& w, const std::string& path) {
  validate(w);
  std::ofstream out(path);
  if (!out) throw WeightError("weights: cannot write '" + path + "'");
  // max_digits10 round-trips every double exactly.
  out << weights_to_json(w).dump();
}

}  // namespace crowdmpc
