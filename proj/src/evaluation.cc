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

#include "locpriv/evaluation.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "locpriv/error.h"

namespace locpriv {
namespace {

int AxisCell(const Grid& g, double coord, bool* clamped) {
  const double half = 0.5 * g.region.side_m;
  if (coord < -half || coord > half || std::isnan(coord)) *clamped = true;
  const double t = (coord + half) / g.cell_side;
  const double c = std::ceil(t) - 1.0;
  if (!(c >= 0.0)) return 0;
  if (c >= g.cells_per_side - 1) return g.cells_per_side - 1;
  return static_cast<int>(c);
}

}  // namespace

Grid Grid::Make(const Region& region, int cells_per_side) {
  Require(cells_per_side > 0, "Grid: cells_per_side must be positive");
  Grid g{region, cells_per_side, region.side_m / cells_per_side};
  g.Validate();
  return g;
}

void Grid::Validate() const {
  region.Validate();
  Require(cells_per_side > 0 && cell_side > 0.0, "Grid: empty grid");
  Require(std::abs(cells_per_side * cell_side - region.side_m) <= 1e-6,
          "Grid: cells_per_side * cell_side must equal the region side");
}

std::size_t AssignCell(const Grid& g, const Location& z, bool* clamped) {
  bool out = false;
  const int col = AxisCell(g, z.x_m, &out);
  const int row = AxisCell(g, z.y_m, &out);
  if (clamped) *clamped = out;
  return static_cast<std::size_t>(row) * g.cells_per_side + col;
}

HitTable::HitTable(std::size_t num_cells, int num_classes)
    : num_cells_(num_cells), num_classes_(num_classes) {
  Require(num_cells > 0 && num_classes > 0, "HitTable: empty table");
  counts_.assign(num_cells * num_classes, 0);
}

void HitTable::Add(std::size_t cell, int class_id, std::int64_t count) {
  Require(cell < num_cells_ && class_id >= 0 && class_id < num_classes_,
          "HitTable::Add: index out of range");
  Require(count >= 0, "HitTable::Add: negative count");
  counts_[cell * num_classes_ + class_id] += count;
  total_ += count;
}

void HitTable::Merge(const HitTable& other) {
  Require(other.num_cells_ == num_cells_ && other.num_classes_ == num_classes_,
          "HitTable::Merge: shape mismatch");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  total_ += other.total_;
  clamped_ += other.clamped_;
}

double BayesErrorGrid(const HitTable& h) {
  Require(h.total() > 0, "BayesErrorGrid: no hits");
  std::int64_t correct = 0;
  for (std::size_t c = 0; c < h.num_cells(); ++c) {
    std::int64_t best = 0;
    for (int j = 0; j < h.num_classes(); ++j) best = std::max(best, h.count(c, j));
    correct += best;
  }
  return 1.0 - static_cast<double>(correct) / static_cast<double>(h.total());
}

double BayesMatrix::at(int obf_count, int grid) const {
  const auto r = std::find(obf_counts.begin(), obf_counts.end(), obf_count);
  const auto c = std::find(grids.begin(), grids.end(), grid);
  Require(r != obf_counts.end() && c != grids.end(),
          "BayesMatrix::at: no such cell");
  return values[r - obf_counts.begin()][c - grids.begin()];
}

BayesMatrix EvaluateMechanism(const Mechanism& mech, const Dataset& data,
                              const EvalOptions& opts, Rng& rng,
                              std::vector<LabeledSample>* points) {
  data.Validate();
  Require(!data.samples.empty(), "EvaluateMechanism: empty dataset");
  Require(!opts.grids.empty() && !opts.obf_counts.empty(),
          "EvaluateMechanism: no grids or counts");
  std::vector<int> counts = opts.obf_counts;
  Require(std::all_of(counts.begin(), counts.end(), [](int c) { return c > 0; }),
          "EvaluateMechanism: obfuscation counts must be positive");
  const int max_count = *std::max_element(counts.begin(), counts.end());

  std::vector<Grid> grids;
  std::vector<HitTable> tables;
  for (int n : opts.grids) {
    grids.push_back(Grid::Make(data.region, n));
    tables.emplace_back(grids.back().num_cells(), data.num_classes);
  }

  BayesMatrix m;
  m.obf_counts = opts.obf_counts;
  m.grids = opts.grids;
  m.values.assign(counts.size(), std::vector<double>(grids.size(), 0.0));

  const std::size_t n = data.samples.size();
  std::vector<Location> w(n), z(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = data.samples[i].location;
  double total_dist = 0.0;
  std::int64_t clamped = 0;
  for (int rep = 1; rep <= max_count; ++rep) {
    mech.SampleBatch(w, rng, z);
    for (std::size_t i = 0; i < n; ++i) {
      total_dist += Distance(w[i], z[i]);
      const int cls = data.samples[i].class_id;
      bool out = false;
      for (std::size_t g = 0; g < grids.size(); ++g)
        tables[g].Add(AssignCell(grids[g], z[i], g == 0 ? &out : nullptr), cls);
      clamped += out;
      if (points && rep <= opts.keep_point_reps) points->push_back({cls, z[i]});
    }
    for (std::size_t r = 0; r < counts.size(); ++r) {
      if (counts[r] != rep) continue;
      for (std::size_t g = 0; g < grids.size(); ++g)
        m.values[r][g] = BayesErrorGrid(tables[g]);
    }
  }
  m.clamped_hits = clamped;
  m.distortion_m = total_dist / (static_cast<double>(n) * max_count);
  return m;
}

AccuracyF1Result AccuracyF1(std::span<const int> predicted, std::span<const int> truth) {
  Require(predicted.size() == truth.size(), "AccuracyF1: length mismatch");
  Require(!truth.empty(), "AccuracyF1: empty input");
  int k = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    Require(predicted[i] >= 0 && truth[i] >= 0, "AccuracyF1: negative label");
    k = std::max({k, predicted[i] + 1, truth[i] + 1});
  }
  std::vector<std::int64_t> tp(k, 0), fp(k, 0), fn(k, 0);
  std::int64_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (predicted[i] == truth[i]) {
      ++hits;
      ++tp[truth[i]];
    } else {
      ++fp[predicted[i]];
      ++fn[truth[i]];
    }
  }
  double f1_sum = 0.0;
  int present = 0;
  for (int c = 0; c < k; ++c) {
    const std::int64_t denom = 2 * tp[c] + fp[c] + fn[c];
    if (denom == 0) continue;
    f1_sum += 2.0 * static_cast<double>(tp[c]) / static_cast<double>(denom);
    ++present;
  }
  return {static_cast<double>(hits) / static_cast<double>(truth.size()),
          f1_sum / present};
}

double EmpiricalDistortion(std::span<const Location> w, std::span<const Location> z) {
  Require(w.size() == z.size() && !w.empty(), "EmpiricalDistortion: bad input");
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) total += Distance(w[i], z[i]);
  return total / static_cast<double>(w.size());
}

void WriteBayesCsv(const BayesMatrix& m, const std::filesystem::path& path,
                   std::string_view provenance) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  if (!provenance.empty()) out << "# " << provenance << '\n';
  out << "obf_count";
  for (int g : m.grids) out << ",grid_" << g;
  out << '\n';
  for (std::size_t r = 0; r < m.obf_counts.size(); ++r) {
    out << m.obf_counts[r];
    for (double v : m.values[r]) out << ',' << FormatDouble(v);
    out << '\n';
  }
}

}  // namespace locpriv
