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

#ifndef LOCPRIV_TESTS_TEST_UTIL_H_
#define LOCPRIV_TESTS_TEST_UTIL_H_

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "locpriv/core_model.h"
#include "locpriv/rng.h"

namespace locpriv::testing {

// Row-stochastic matrix with exponential(1) entries normalized per row.
inline Eigen::MatrixXd RandomStochastic(int rows, int cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = -std::log(1.0 - rng.Uniform());
    m.row(i) /= m.row(i).sum();
  }
  return m;
}

// Joint table summing to one.
inline Eigen::MatrixXd RandomJoint(int rows, int cols, Rng& rng) {
  Eigen::MatrixXd m = RandomStochastic(1, rows * cols, rng);
  return Eigen::Map<Eigen::MatrixXd>(m.data(), rows, cols);
}

inline std::filesystem::path TempDir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("locpriv_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string ReadFile(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace locpriv::testing

#endif  // LOCPRIV_TESTS_TEST_UTIL_H_
