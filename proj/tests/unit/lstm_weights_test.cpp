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

#include <filesystem>
#include <fstream>
#include <limits>
#include <string>

#include <gtest/gtest.h>

#include "crowdmpc/lstm_weights.hpp"

namespace crowdmpc {
namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("crowdmpc_" + name);
}

template <class F>
std::string thrown_message(F&& f) {
  try {
    f();
  } catch (const WeightError& e) {
    return e.what();
  }
  return {};
}

TEST(LstmWeights, SaveLoadRoundTripIsExact) {
  const LstmWeights w = LstmWeights::random(17, 0.5, 8, 4, 2.0, 4, 6);
  const auto path = temp_file("roundtrip.json");
  save_weights(w, path.string());
  const LstmWeights back = load_weights(path.string());
  EXPECT_EQ(back.hidden_size, w.hidden_size);
  EXPECT_EQ(back.grid, w.grid);
  EXPECT_EQ(back.extent_m, w.extent_m);
  EXPECT_EQ(back.input_embedding.data, w.input_embedding.data);
  EXPECT_EQ(back.pool_embedding.data, w.pool_embedding.data);
  EXPECT_EQ(back.lstm_input.data, w.lstm_input.data);
  EXPECT_EQ(back.lstm_hidden.data, w.lstm_hidden.data);
  EXPECT_EQ(back.lstm_bias, w.lstm_bias);
  EXPECT_EQ(back.output.data, w.output.data);
  EXPECT_EQ(back.output_bias, w.output_bias);
  std::filesystem::remove(path);
}

TEST(LstmWeights, DefaultShapesValidate) {
  EXPECT_NO_THROW(validate(LstmWeights::zeros()));
  const LstmWeights w = LstmWeights::zeros();
  EXPECT_EQ(w.hidden_size, 64u);
  EXPECT_EQ(w.grid, 4u);
  EXPECT_EQ(w.lstm_hidden.rows, 256u);
  EXPECT_EQ(w.pool_embedding.cols, 4u * 4u * 64u);
}

TEST(LstmWeights, MismatchedGateMatrixNamesTheTensor) {
  auto j = weights_to_json(LstmWeights::zeros(8, 2, 2.0, 4, 4));
  j["tensors"]["lstm.weight_hh"]["shape"] = {31, 8};
  j["tensors"]["lstm.weight_hh"]["data"] = std::vector<double>(31 * 8, 0.0);
  const std::string msg = thrown_message([&] { weights_from_json(j); });
  EXPECT_NE(msg.find("lstm.weight_hh"), std::string::npos) << msg;
}

TEST(LstmWeights, NonFiniteEntryRejected) {
  LstmWeights w = LstmWeights::zeros(8, 2, 2.0, 4, 4);
  w.lstm_bias[3] = std::numeric_limits<double>::quiet_NaN();
  const std::string msg = thrown_message([&] { validate(w); });
  EXPECT_NE(msg.find("lstm.bias"), std::string::npos) << msg;

  // NaN cannot be written as JSON; it comes back as null.
  auto j = weights_to_json(LstmWeights::zeros(8, 2, 2.0, 4, 4));
  j["tensors"]["output.bias"]["data"][0] = nullptr;
  EXPECT_THROW(weights_from_json(j), WeightError);
}

TEST(LstmWeights, DataCountMustMatchShape) {
  auto j = weights_to_json(LstmWeights::zeros(8, 2, 2.0, 4, 4));
  j["tensors"]["output.weight"]["data"].push_back(0.0);
  const std::string msg = thrown_message([&] { weights_from_json(j); });
  EXPECT_NE(msg.find("output.weight"), std::string::npos) << msg;
}

TEST(LstmWeights, UnknownAndMissingTensorsRejected) {
  auto j = weights_to_json(LstmWeights::zeros(8, 2, 2.0, 4, 4));
  auto extra = j;
  extra["tensors"]["decoder.weight"] = {{"shape", {1}}, {"data", {0.0}}};
  EXPECT_NE(thrown_message([&] { weights_from_json(extra); }).find("decoder.weight"), std::string::npos);
  auto missing = j;
  missing["tensors"].erase("lstm.bias");
  EXPECT_NE(thrown_message([&] { weights_from_json(missing); }).find("lstm.bias"), std::string::npos);
  auto top = j;
  top["dropout"] = 0.1;
  EXPECT_THROW(weights_from_json(top), WeightError);
}

TEST(LstmWeights, FileErrors) {
  EXPECT_THROW(load_weights("/nonexistent/dir/weights.json"), WeightError);
  const auto path = temp_file("garbage.json");
  {
    std::ofstream out(path);
    out << "{not json";
  }
  EXPECT_THROW(load_weights(path.string()), WeightError);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace crowdmpc
