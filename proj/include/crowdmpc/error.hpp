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

#include <stdexcept>
#include <string>

namespace crowdmpc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite or otherwise malformed robot/agent state.
class InvalidStateError : public Error {
 public:
  using Error::Error;
};

/// Mismatched dimensions between arguments (horizons, windows, plans).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Predictor weights that do not fit the declared architecture.
class WeightError : public Error {
 public:
  using Error::Error;
};

class SolverInputError : public Error {
 public:
  using Error::Error;
};

class ScenarioError : public Error {
 public:
  using Error::Error;
};

/// Invalid run manifest; the message names the offending key.
class ManifestError : public Error {
 public:
  using Error::Error;
};

}  // namespace crowdmpc
