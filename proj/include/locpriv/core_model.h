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

#ifndef LOCPRIV_CORE_MODEL_H_
#define LOCPRIV_CORE_MODEL_H_

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace locpriv {

// A point in the local metric frame: meters east/north of the region center.
struct Location {
  double x_m = 0.0;
  double y_m = 0.0;

  // Normalized coordinates, in [-1, 1]^2 for points inside a region of the
  // given side.
  Eigen::Vector2d Normalized(double side_m) const {
    return {2.0 * x_m / side_m, 2.0 * y_m / side_m};
  }
  static Location FromNormalized(double nx, double ny, double side_m) {
    return {0.5 * nx * side_m, 0.5 * ny * side_m};
  }
  bool IsFinite() const;
  friend bool operator==(const Location&, const Location&) = default;
};

double Distance(const Location& a, const Location& b);

struct Region {
  double center_lat = 48.8635;
  double center_lon = 2.3486;
  double side_m = 6500.0;

  void Validate() const;
  bool Contains(const Location& p) const {
    return p.x_m >= -0.5 * side_m && p.x_m <= 0.5 * side_m &&
           p.y_m >= -0.5 * side_m && p.y_m <= 0.5 * side_m;
  }
};

// Probability vector; entries non-negative and summing to one within 1e-9.
class DiscreteDist {
 public:
  DiscreteDist() = default;
  explicit DiscreteDist(std::vector<double> probs);
  static DiscreteDist Uniform(std::size_t n);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const { return probs_; }

 private:
  std::vector<double> probs_;
};

// Row-stochastic matrix representing a channel P(out | in).
class CondTable {
 public:
  CondTable() = default;
  explicit CondTable(Eigen::MatrixXd matrix);

  static CondTable Identity(std::size_t n);
  // Every input mapped to the same output column.
  static CondTable Constant(std::size_t rows, std::size_t cols, std::size_t col);
  static CondTable UniformRows(std::size_t rows, std::size_t cols);
  // lambda * a + (1 - lambda) * b.
  static CondTable Mix(const CondTable& a, const CondTable& b, double lambda);

  std::size_t rows() const { return static_cast<std::size_t>(m_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(m_.cols()); }
  double operator()(std::size_t r, std::size_t c) const { return m_(r, c); }
  const Eigen::MatrixXd& matrix() const { return m_; }
  DiscreteDist Row(std::size_t r) const;

 private:
  Eigen::MatrixXd m_;
};

// Joint distribution P(x, w, z, y) of identity, true location, reported
// location and predicted identity.
class JointTable {
 public:
  JointTable(std::size_t nx, std::size_t nw, std::size_t nz, std::size_t ny);

  double& at(std::size_t x, std::size_t w, std::size_t z, std::size_t y) {
    return data_[Offset(x, w, z, y)];
  }
  double at(std::size_t x, std::size_t w, std::size_t z, std::size_t y) const {
    return data_[Offset(x, w, z, y)];
  }
  std::size_t nx() const { return nx_; }
  std::size_t nw() const { return nw_; }
  std::size_t nz() const { return nz_; }
  std::size_t ny() const { return ny_; }
  double Total() const;

  // Pairwise marginals as |A| x |B| matrices.
  Eigen::MatrixXd MarginalXW() const;
  Eigen::MatrixXd MarginalXZ() const;
  Eigen::MatrixXd MarginalXY() const;
  Eigen::MatrixXd MarginalWZ() const;
  Eigen::MatrixXd MarginalZY() const;

 private:
  std::size_t Offset(std::size_t x, std::size_t w, std::size_t z,
                     std::size_t y) const {
    return ((x * nw_ + w) * nz_ + z) * ny_ + y;
  }
  std::size_t nx_, nw_, nz_, ny_;
  std::vector<double> data_;
};

// P(x,w,z,y) = P(x,w) * mech(z|w) * pred(y|z). `data_model` is |X| x |W|
// and must sum to one.
JointTable DeriveJoint(const Eigen::MatrixXd& data_model, const CondTable& mech,
                       const CondTable& pred);

DiscreteDist MarginalX(const JointTable& joint);
DiscreteDist MarginalZ(const JointTable& joint);

struct Posterior {
  CondTable table;                 // rows indexed by z, columns by x
  std::vector<bool> zero_mass;     // z with P_Z(z) = 0; row set to uniform
};
Posterior PosteriorXGivenZ(const JointTable& joint);
// Same computation from a |X| x |Z| joint matrix.
Posterior PosteriorFromJointXZ(const Eigen::MatrixXd& joint_xz);

// Sum over w, z of P_W(w) mech(z|w) loss(w, z).
double ExpectedDistortion(const DiscreteDist& p_w, const CondTable& mech,
                          const Eigen::MatrixXd& loss);
// Euclidean distance between input and output supports as the loss.
double ExpectedDistortion(const DiscreteDist& p_w, const CondTable& mech,
                          std::span<const Location> inputs,
                          std::span<const Location> outputs);
Eigen::MatrixXd DistanceMatrix(std::span<const Location> inputs,
                               std::span<const Location> outputs);

}  // namespace locpriv

#endif  // LOCPRIV_CORE_MODEL_H_
