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

#include "locpriv/info_theory.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "locpriv/error.h"

namespace locpriv {
namespace {

double ClampedLog(double p) { return std::log(std::max(p, kLogFloor)); }

// p log p with the 0 log 0 = 0 convention and a clamped log.
double PLogP(double p) { return p > 0.0 ? p * ClampedLog(p) : 0.0; }
double PLogPDerivative(double p) {
  return p >= kLogFloor ? std::log(p) + 1.0 : std::log(kLogFloor);
}

}  // namespace

double NatsToBits(double nats) { return nats / std::numbers::ln2; }

double Entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) h -= PLogP(v);
  return h;
}

double Entropy(const DiscreteDist& p) { return Entropy(p.probs()); }

double JointEntropy(const Eigen::MatrixXd& joint) {
  return Entropy(std::span<const double>(joint.data(), joint.size()));
}

double CondEntropy(const Eigen::MatrixXd& joint_xy) {
  const Eigen::VectorXd p_y = joint_xy.colwise().sum().transpose();
  return JointEntropy(joint_xy) -
         Entropy(std::span<const double>(p_y.data(), p_y.size()));
}

double MutualInfo(const Eigen::MatrixXd& joint_xy) {
  const Eigen::VectorXd p_x = joint_xy.rowwise().sum();
  const Eigen::VectorXd p_y = joint_xy.colwise().sum().transpose();
  double mi = 0.0;
  for (Eigen::Index x = 0; x < joint_xy.rows(); ++x)
    for (Eigen::Index y = 0; y < joint_xy.cols(); ++y) {
      const double p = joint_xy(x, y);
      if (p <= 0.0) continue;
      mi += p * (ClampedLog(p) - ClampedLog(p_x(x) * p_y(y)));
    }
  return std::max(mi, 0.0);
}

double CrossEntropy(const DiscreteDist& p_z, const CondTable& post,
                    const CondTable& pred) {
  Require(post.rows() == p_z.size() && pred.rows() == p_z.size() &&
              post.cols() == pred.cols(),
          "CrossEntropy: shape mismatch");
  double ce = 0.0;
  for (std::size_t z = 0; z < p_z.size(); ++z) {
    if (p_z[z] == 0.0) continue;
    double row = 0.0;
    for (std::size_t x = 0; x < post.cols(); ++x) {
      if (post(z, x) == 0.0) continue;
      row -= post(z, x) * ClampedLog(pred(z, x));
    }
    ce += p_z[z] * row;
  }
  return ce;
}

double BayesError(const Eigen::MatrixXd& joint_xy) {
  double hit = 0.0;
  for (Eigen::Index y = 0; y < joint_xy.cols(); ++y) hit += joint_xy.col(y).maxCoeff();
  return 1.0 - hit;
}

SanthiVardy SanthiVardyGap(const Eigen::MatrixXd& joint_xy) {
  const double h_bits = NatsToBits(std::max(CondEntropy(joint_xy), 0.0));
  return {BayesError(joint_xy), 1.0 - std::exp2(-h_bits)};
}

void BatchMats::Validate() const {
  Require(targets.rows() >= 1, "BatchMats: empty batch");
  Require(targets.rows() == predictions.rows() &&
              targets.cols() == predictions.cols(),
          "BatchMats: T and Q shapes differ");
  for (Eigen::Index i = 0; i < targets.rows(); ++i) {
    int ones = 0;
    for (Eigen::Index x = 0; x < targets.cols(); ++x) {
      const double t = targets(i, x);
      Require(t == 0.0 || t == 1.0, "BatchMats: T is not one-hot");
      ones += t == 1.0;
    }
    Require(ones == 1, "BatchMats: T row without exactly one 1");
    Require((predictions.row(i).array() >= 0.0).all() &&
                std::abs(predictions.row(i).sum() - 1.0) <= 1e-6,
            "BatchMats: Q row is not a distribution");
  }
}

BatchMats BatchMats::FromLabels(std::span<const int> labels,
                                const Eigen::MatrixXd& predictions) {
  Require(labels.size() == static_cast<std::size_t>(predictions.rows()),
          "BatchMats: label count differs from prediction rows");
  BatchMats b;
  b.targets = Eigen::MatrixXd::Zero(predictions.rows(), predictions.cols());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    Require(labels[i] >= 0 && labels[i] < predictions.cols(),
            "BatchMats: label out of range");
    b.targets(i, labels[i]) = 1.0;
  }
  b.predictions = predictions;
  return b;
}

BatchEstimate EstimateBatch(const BatchMats& b) {
  const double inv_n = 1.0 / static_cast<double>(b.targets.rows());
  BatchEstimate e;
  e.p_x = b.targets.colwise().sum().transpose() * inv_n;
  e.p_y = b.predictions.colwise().sum().transpose() * inv_n;
  // Sum_i J_i with J_i(x, y) = T(i, x) Q(i, y).
  e.p_xy = b.targets.transpose() * b.predictions * inv_n;
  return e;
}

double BatchMutualInfo(const BatchMats& b) { return BatchMutualInfo(b, nullptr); }

double BatchMutualInfo(const BatchMats& b, Eigen::MatrixXd* grad_predictions) {
  const BatchEstimate e = EstimateBatch(b);
  // I = Sum_xy phi(P_xy) - Sum_y phi(P_y) - Sum_x phi(P_x), phi(p) = p log p.
  double mi = 0.0;
  for (Eigen::Index x = 0; x < e.p_xy.rows(); ++x)
    for (Eigen::Index y = 0; y < e.p_xy.cols(); ++y) mi += PLogP(e.p_xy(x, y));
  for (Eigen::Index y = 0; y < e.p_y.size(); ++y) mi -= PLogP(e.p_y(y));
  for (Eigen::Index x = 0; x < e.p_x.size(); ++x) mi -= PLogP(e.p_x(x));

  if (grad_predictions != nullptr) {
    const Eigen::Index n = b.targets.rows();
    const Eigen::Index k = b.predictions.cols();
    const double inv_n = 1.0 / static_cast<double>(n);
    Eigen::MatrixXd dxy(e.p_xy.rows(), k);
    for (Eigen::Index x = 0; x < e.p_xy.rows(); ++x)
      for (Eigen::Index y = 0; y < k; ++y) dxy(x, y) = PLogPDerivative(e.p_xy(x, y));
    Eigen::RowVectorXd dy(k);
    for (Eigen::Index y = 0; y < k; ++y) dy(y) = PLogPDerivative(e.p_y(y));
    // dI/dQ(i, y) = (phi'(P_xy(x_i, y)) - phi'(P_y(y))) / N'.
    *grad_predictions = (b.targets * dxy).rowwise() - dy;
    *grad_predictions *= inv_n;
  }
  return mi;
}

}  // namespace locpriv
