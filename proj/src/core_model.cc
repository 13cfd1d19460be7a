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

#include "locpriv/core_model.h"

#include <cmath>
#include <numeric>
#include <string>

#include "locpriv/error.h"

namespace locpriv {
namespace {

constexpr double kStochasticTol = 1e-9;

void CheckStochasticRows(const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    double sum = 0.0;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double v = m(r, c);
      Require(std::isfinite(v) && v >= 0.0,
              "CondTable: negative or non-finite entry in row " +
                  std::to_string(r));
      sum += v;
    }
    Require(std::abs(sum - 1.0) <= kStochasticTol,
            "CondTable: row " + std::to_string(r) + " sums to " +
                std::to_string(sum));
  }
}

}  // namespace

bool Location::IsFinite() const {
  return std::isfinite(x_m) && std::isfinite(y_m);
}

double Distance(const Location& a, const Location& b) {
  return std::hypot(a.x_m - b.x_m, a.y_m - b.y_m);
}

void Region::Validate() const {
  Require(side_m > 0.0, "Region: side must be positive");
  Require(std::abs(center_lat) <= 90.0, "Region: latitude out of range");
  Require(std::abs(center_lon) <= 180.0, "Region: longitude out of range");
}

DiscreteDist::DiscreteDist(std::vector<double> probs) : probs_(std::move(probs)) {
  Require(!probs_.empty(), "DiscreteDist: empty");
  double sum = 0.0;
  for (double p : probs_) {
    Require(std::isfinite(p) && p >= 0.0, "DiscreteDist: invalid entry");
    sum += p;
  }
  Require(std::abs(sum - 1.0) <= kStochasticTol,
          "DiscreteDist: entries sum to " + std::to_string(sum));
}

DiscreteDist DiscreteDist::Uniform(std::size_t n) {
  Require(n > 0, "DiscreteDist: empty");
  return DiscreteDist(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

CondTable::CondTable(Eigen::MatrixXd matrix) : m_(std::move(matrix)) {
  Require(m_.rows() > 0 && m_.cols() > 0, "CondTable: empty");
  CheckStochasticRows(m_);
}

CondTable CondTable::Identity(std::size_t n) {
  return CondTable(Eigen::MatrixXd::Identity(n, n));
}

CondTable CondTable::Constant(std::size_t rows, std::size_t cols,
                              std::size_t col) {
  Require(col < cols, "CondTable::Constant: column out of range");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
  m.col(col).setOnes();
  return CondTable(std::move(m));
}

CondTable CondTable::UniformRows(std::size_t rows, std::size_t cols) {
  return CondTable(Eigen::MatrixXd::Constant(rows, cols, 1.0 / cols));
}

CondTable CondTable::Mix(const CondTable& a, const CondTable& b, double lambda) {
  Require(a.rows() == b.rows() && a.cols() == b.cols(),
          "CondTable::Mix: shape mismatch");
  Require(lambda >= 0.0 && lambda <= 1.0, "CondTable::Mix: lambda not in [0,1]");
  return CondTable(lambda * a.m_ + (1.0 - lambda) * b.m_);
}

DiscreteDist CondTable::Row(std::size_t r) const {
  Require(r < rows(), "CondTable::Row: index out of range");
  std::vector<double> p(cols());
  for (std::size_t c = 0; c < cols(); ++c) p[c] = m_(r, c);
  return DiscreteDist(std::move(p));
}

JointTable::JointTable(std::size_t nx, std::size_t nw, std::size_t nz,
                       std::size_t ny)
    : nx_(nx), nw_(nw), nz_(nz), ny_(ny), data_(nx * nw * nz * ny, 0.0) {}

double JointTable::Total() const {
  return std::accumulate(data_.begin(), data_.end(), 0.0);
}

#define LOCPRIV_MARGINAL(name, rows_n, cols_n, ri, ci)               \
  Eigen::MatrixXd JointTable::name() const {                         \
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows_n, cols_n);     \
    for (std::size_t x = 0; x < nx_; ++x)                            \
      for (std::size_t w = 0; w < nw_; ++w)                          \
        for (std::size_t z = 0; z < nz_; ++z)                        \
          for (std::size_t y = 0; y < ny_; ++y)                      \
            out(ri, ci) += data_[Offset(x, w, z, y)];                \
    return out;                                                      \
  }

LOCPRIV_MARGINAL(MarginalXW, nx_, nw_, x, w)
LOCPRIV_MARGINAL(MarginalXZ, nx_, nz_, x, z)
LOCPRIV_MARGINAL(MarginalXY, nx_, ny_, x, y)
LOCPRIV_MARGINAL(MarginalWZ, nw_, nz_, w, z)
LOCPRIV_MARGINAL(MarginalZY, nz_, ny_, z, y)

#undef LOCPRIV_MARGINAL

JointTable DeriveJoint(const Eigen::MatrixXd& data_model, const CondTable& mech,
                       const CondTable& pred) {
  Require(static_cast<std::size_t>(data_model.cols()) == mech.rows(),
          "DeriveJoint: data model |W| does not match mechanism rows");
  Require(mech.cols() == pred.rows(),
          "DeriveJoint: mechanism |Z| does not match predictor rows");
  Require((data_model.array() >= 0.0).all() &&
              std::abs(data_model.sum() - 1.0) <= kStochasticTol,
          "DeriveJoint: data model is not a distribution");
  const std::size_t nx = data_model.rows();
  const std::size_t nw = data_model.cols();
  const std::size_t nz = mech.cols();
  const std::size_t ny = pred.cols();
  JointTable joint(nx, nw, nz, ny);
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t w = 0; w < nw; ++w) {
      const double pxw = data_model(x, w);
      if (pxw == 0.0) continue;
      for (std::size_t z = 0; z < nz; ++z) {
        const double pxwz = pxw * mech(w, z);
        for (std::size_t y = 0; y < ny; ++y) joint.at(x, w, z, y) = pxwz * pred(z, y);
      }
    }
  return joint;
}

DiscreteDist MarginalX(const JointTable& joint) {
  const Eigen::VectorXd p = joint.MarginalXZ().rowwise().sum();
  return DiscreteDist(std::vector<double>(p.data(), p.data() + p.size()));
}

DiscreteDist MarginalZ(const JointTable& joint) {
  const Eigen::VectorXd p = joint.MarginalXZ().colwise().sum().transpose();
  return DiscreteDist(std::vector<double>(p.data(), p.data() + p.size()));
}

Posterior PosteriorFromJointXZ(const Eigen::MatrixXd& joint_xz) {
  const Eigen::Index nx = joint_xz.rows();
  const Eigen::Index nz = joint_xz.cols();
  Eigen::MatrixXd post(nz, nx);
  std::vector<bool> zero_mass(nz, false);
  for (Eigen::Index z = 0; z < nz; ++z) {
    const double pz = joint_xz.col(z).sum();
    if (pz <= 0.0) {
      post.row(z).setConstant(1.0 / static_cast<double>(nx));
      zero_mass[z] = true;
    } else {
      post.row(z) = joint_xz.col(z).transpose() / pz;
    }
  }
  return {CondTable(std::move(post)), std::move(zero_mass)};
}

Posterior PosteriorXGivenZ(const JointTable& joint) {
  return PosteriorFromJointXZ(joint.MarginalXZ());
}

double ExpectedDistortion(const DiscreteDist& p_w, const CondTable& mech,
                          const Eigen::MatrixXd& loss) {
  Require(p_w.size() == mech.rows(), "ExpectedDistortion: |W| mismatch");
  Require(static_cast<std::size_t>(loss.rows()) == mech.rows() &&
              static_cast<std::size_t>(loss.cols()) == mech.cols(),
          "ExpectedDistortion: loss shape mismatch");
  double total = 0.0;
  for (std::size_t w = 0; w < mech.rows(); ++w) {
    double row = 0.0;
    for (std::size_t z = 0; z < mech.cols(); ++z) {
      Require(loss(w, z) >= 0.0, "ExpectedDistortion: negative loss");
      row += mech(w, z) * loss(w, z);
    }
    total += p_w[w] * row;
  }
  return total;
}

Eigen::MatrixXd DistanceMatrix(std::span<const Location> inputs,
                               std::span<const Location> outputs) {
  Eigen::MatrixXd d(inputs.size(), outputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i)
    for (std::size_t j = 0; j < outputs.size(); ++j)
      d(i, j) = Distance(inputs[i], outputs[j]);
  return d;
}

double ExpectedDistortion(const DiscreteDist& p_w, const CondTable& mech,
                          std::span<const Location> inputs,
                          std::span<const Location> outputs) {
  return ExpectedDistortion(p_w, mech, DistanceMatrix(inputs, outputs));
}

}  // namespace locpriv
