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

#ifndef LOCPRIV_EVALUATION_H_
#define LOCPRIV_EVALUATION_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "locpriv/core_model.h"
#include "locpriv/dataset.h"
#include "locpriv/mechanisms.h"
#include "locpriv/rng.h"

namespace locpriv {

// Square partition of the region into cells_per_side^2 cells.
struct Grid {
  Region region;
  int cells_per_side = 0;
  double cell_side = 0.0;

  static Grid Make(const Region& region, int cells_per_side);
  void Validate() const;
  std::size_t num_cells() const {
    return static_cast<std::size_t>(cells_per_side) * cells_per_side;
  }
};

inline constexpr int kPaperGrids[] = {13, 65, 130, 260};
inline constexpr int kPaperObfCounts[] = {10, 100, 200, 500};

// Cell index row * cells_per_side + col. Cells are closed on the upper side,
// so a point on an interior boundary goes to the lower-index cell. Points
// outside the region are clamped to the nearest boundary cell and reported.
std::size_t AssignCell(const Grid& g, const Location& z, bool* clamped = nullptr);

// Dense per-cell, per-class hit counts.
class HitTable {
 public:
  HitTable(std::size_t num_cells, int num_classes);

  void Add(std::size_t cell, int class_id, std::int64_t count = 1);
  void Merge(const HitTable& other);

  std::size_t num_cells() const { return num_cells_; }
  int num_classes() const { return num_classes_; }
  std::int64_t count(std::size_t cell, int class_id) const {
    return counts_[cell * num_classes_ + class_id];
  }
  std::int64_t total() const { return total_; }
  std::int64_t clamped() const { return clamped_; }
  void add_clamped(std::int64_t n) { clamped_ += n; }

 private:
  std::size_t num_cells_;
  int num_classes_;
  std::vector<std::int64_t> counts_;
  std::int64_t total_ = 0;
  std::int64_t clamped_ = 0;
};

// 1 - sum over cells of max_j count(cell, j) / total.
double BayesErrorGrid(const HitTable& h);

struct BayesMatrix {
  std::vector<int> obf_counts;  // rows
  std::vector<int> grids;       // columns (cells per side)
  std::vector<std::vector<double>> values;
  std::int64_t clamped_hits = 0;  // at the largest obf count
  double distortion_m = 0.0;      // empirical, at the largest obf count

  double at(int obf_count, int grid) const;
};

struct EvalOptions {
  std::vector<int> grids{std::begin(kPaperGrids), std::end(kPaperGrids)};
  std::vector<int> obf_counts{std::begin(kPaperObfCounts), std::end(kPaperObfCounts)};
  // Obfuscation rounds copied to `points` (0 = none).
  int keep_point_reps = 0;
};

// Obfuscates every sample max(obf_counts) times; the estimate for count c
// uses the first c rounds, so a row is a prefix of the next.
BayesMatrix EvaluateMechanism(const Mechanism& mech, const Dataset& data,
                              const EvalOptions& opts, Rng& rng,
                              std::vector<LabeledSample>* points = nullptr);

struct AccuracyF1Result {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
};
// Macro F1 averages over classes that occur in the truth or the predictions.
AccuracyF1Result AccuracyF1(std::span<const int> predicted, std::span<const int> truth);

double EmpiricalDistortion(std::span<const Location> w, std::span<const Location> z);

// Rows are obfuscation counts, columns are grids.
void WriteBayesCsv(const BayesMatrix& m, const std::filesystem::path& path,
                   std::string_view provenance = {});

}  // namespace locpriv

#endif  // LOCPRIV_EVALUATION_H_
