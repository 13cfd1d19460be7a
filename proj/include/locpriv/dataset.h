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

#ifndef LOCPRIV_DATASET_H_
#define LOCPRIV_DATASET_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "locpriv/core_model.h"

namespace locpriv {

struct LabeledSample {
  int class_id = 0;
  Location location;
};

enum class Split { kTrain, kVal, kTest };
std::string_view SplitName(Split split);
Split ParseSplit(std::string_view name);

struct Dataset {
  std::vector<LabeledSample> samples;
  int num_classes = 0;
  Region region;
  Split split = Split::kTrain;
  std::uint64_t seed = 0;

  // Throws ContractError unless every label is in range, every location is
  // finite and (for the train split) every class is represented.
  void Validate() const;
  std::vector<std::size_t> ClassCounts() const;
};

struct DatasetSplits {
  Dataset train;
  Dataset val;
  Dataset test;
};

// Empirical P(x, w) with weight 1/N per sample; identical locations are
// merged into one support point.
struct EmpiricalModel {
  std::vector<Location> support;  // distinct w
  Eigen::MatrixXd joint_xw;       // |X| x |W|
};
EmpiricalModel BuildEmpiricalModel(const Dataset& data);

// CSV with header `class_id,x_m,y_m`, preceded by an optional `#` provenance
// line. The sidecar `<path>.meta.json` carries region, split, seed and the
// class count.
void WriteDatasetCsv(const Dataset& data, const std::filesystem::path& path,
                     std::string_view provenance = {});
Dataset ReadDatasetCsv(const std::filesystem::path& path);

// Points-only variant used for obfuscated clouds (no sidecar).
void WritePointsCsv(std::span<const LabeledSample> points,
                    const std::filesystem::path& path,
                    std::string_view provenance = {});

// Shortest round-trip decimal form of a double.
std::string FormatDouble(double v);

}  // namespace locpriv

#endif  // LOCPRIV_DATASET_H_
