// Copyright 2026 The Fedtrigger Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FEDTRIGGER_ERRORS_H_
#define FEDTRIGGER_ERRORS_H_

#include <stdexcept>
#include <string>
#include <vector>

namespace fedtrigger {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input tensors or parameter vectors with incompatible shapes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A non-finite value appeared during a forward or backward pass.
class NumericError : public Error {
 public:
  NumericError(int layer_index, const std::string& layer_kind)
      : Error("non-finite value in layer " + std::to_string(layer_index) +
              " (" + layer_kind + ")"),
        layer_index_(layer_index) {}

  int layer_index() const { return layer_index_; }

 private:
  int layer_index_;
};

// Malformed input files (raw datasets, config text).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Semantically invalid configuration. Carries every violated constraint.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> violations)
      : Error(Join(violations)), violations_(std::move(violations)) {}
  explicit ConfigError(const std::string& violation)
      : ConfigError(std::vector<std::string>{violation}) {}

  const std::vector<std::string>& violations() const { return violations_; }

 private:
  static std::string Join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& item : items) {
      if (!out.empty()) out += "; ";
      out += item;
    }
    return out;
  }

  std::vector<std::string> violations_;
};

}  // namespace fedtrigger

#endif  // FEDTRIGGER_ERRORS_H_
