// Copyright 2026 The locpriv Authors
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

#ifndef LOCPRIV_ERROR_H_
#define LOCPRIV_ERROR_H_

#include <stdexcept>
#include <string>

namespace locpriv {

// Violated precondition of a library call (shape mismatch, out-of-range
// index, invalid parameter).
class ContractError : public std::invalid_argument {
 public:
  explicit ContractError(const std::string& what) : std::invalid_argument(what) {}
};

// Input data cannot satisfy the requested pipeline (missing users, too few
// samples, unparseable file).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

inline void Require(bool condition, const std::string& message) {
  if (!condition) throw ContractError(message);
}

}  // namespace locpriv

#endif  // LOCPRIV_ERROR_H_
