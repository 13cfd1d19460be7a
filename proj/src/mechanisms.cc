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

#include "locpriv/mechanisms.h"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "locpriv/dataset.h"
#include "locpriv/error.h"

namespace locpriv {

void Mechanism::SampleBatch(std::span<const Location> in, Rng& rng,
                            std::span<Location> out) const {
  Require(in.size() == out.size(), "SampleBatch: size mismatch");
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = Sample(in[i], rng);
}

double LambertWm1(double x) {
  constexpr double kBranch = -1.0 / std::numbers::e;
  Require(x >= kBranch - 1e-15 && x < 0.0, "LambertWm1: argument outside [-1/e, 0)");
  if (x <= kBranch) return -1.0;
  double w;
  if (x < -0.25) {
    // Series about the branch point.
    const double p = -std::sqrt(2.0 * (1.0 + std::numbers::e * x));
    w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
  } else {
    const double l1 = std::log(-x);
    const double l2 = std::log(-l1);
    w = l1 - l2 + l2 / l1;
  }
  for (int iter = 0; iter < 64; ++iter) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double wp1 = w + 1.0;
    if (wp1 == 0.0) break;
    const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
    const double step = f / denom;
    w -= step;
    if (std::abs(step) <= 1e-12 * std::abs(w)) break;
  }
  return w;
}

PlanarLaplace::PlanarLaplace(double epsilon_per_m) : epsilon_(epsilon_per_m) {
  Require(std::isfinite(epsilon_) && epsilon_ > 0.0,
          "PlanarLaplace: epsilon must be positive");
}

double PlanarLaplace::Density(const Location& w, const Location& z) const {
  return epsilon_ * epsilon_ / (2.0 * std::numbers::pi) *
         std::exp(-epsilon_ * Distance(w, z));
}

double PlanarLaplace::InverseRadialCdf(double p) const {
  Require(p >= 0.0 && p < 1.0, "InverseRadialCdf: p outside [0, 1)");
  if (p == 0.0) return 0.0;
  return -(LambertWm1((p - 1.0) / std::numbers::e) + 1.0) / epsilon_;
}

Location PlanarLaplace::Sample(const Location& w, Rng& rng) const {
  const double theta = 2.0 * std::numbers::pi * rng.Uniform();
  const double r = InverseRadialCdf(rng.Uniform());
  return {w.x_m + r * std::cos(theta), w.y_m + r * std::sin(theta)};
}

TabularMechanism::TabularMechanism(std::vector<Location> support, CondTable table)
    : support_(std::move(support)), table_(std::move(table)) {
  Require(support_.size() == table_.cols(),
          "TabularMechanism: support size differs from table columns");
}

std::size_t TabularMechanism::SampleIndex(std::size_t w_index, Rng& rng) const {
  Require(w_index < table_.rows(), "TabularMechanism: input index out of range");
  const double u = rng.Uniform();
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t z = 0; z < table_.cols(); ++z) {
    const double p = table_(w_index, z);
    if (p <= 0.0) continue;
    acc += p;
    last_positive = z;
    if (u < acc) return z;
  }
  return last_positive;
}

void TabularMechanism::Save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "locpriv-tabular-mechanism 1\n";
  out << "rows " << table_.rows() << " cols " << table_.cols() << '\n';
  out << "support";
  for (const auto& s : support_)
    out << ' ' << FormatDouble(s.x_m) << ' ' << FormatDouble(s.y_m);
  out << '\n';
  for (std::size_t r = 0; r < table_.rows(); ++r) {
    for (std::size_t c = 0; c < table_.cols(); ++c)
      out << (c ? " " : "") << FormatDouble(table_(r, c));
    out << '\n';
  }
}

TabularMechanism TabularMechanism::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string magic, tag1, tag2;
  int version = 0;
  std::size_t rows = 0, cols = 0;
  in >> magic >> version >> tag1 >> rows >> tag2 >> cols;
  if (!in || magic != "locpriv-tabular-mechanism" || tag1 != "rows" ||
      tag2 != "cols" || rows == 0 || cols == 0)
    throw DataError("bad tabular mechanism header in " + path.string());
  std::string tag;
  in >> tag;
  if (tag != "support") throw DataError("missing support line in " + path.string());
  std::vector<Location> support(cols);
  for (auto& s : support) in >> s.x_m >> s.y_m;
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) in >> m(r, c);
  if (!in) throw DataError("truncated tabular mechanism in " + path.string());
  try {
    return TabularMechanism(std::move(support), CondTable(std::move(m)));
  } catch (const ContractError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace locpriv
