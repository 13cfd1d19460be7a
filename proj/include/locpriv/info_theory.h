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

#ifndef LOCPRIV_INFO_THEORY_H_
#define LOCPRIV_INFO_THEORY_H_

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "locpriv/core_model.h"

// Discrete information measures. Everything is in nats unless a function
// name says otherwise; 0 log 0 is taken as 0 and other logs are clamped at
// kLogFloor.
namespace locpriv {

inline constexpr double kLogFloor = 1e-12;

double NatsToBits(double nats);

double Entropy(std::span<const double> p);
double Entropy(const DiscreteDist& p);
// H of a joint given as a matrix (all cells).
double JointEntropy(const Eigen::MatrixXd& joint);

// `joint_xy` is |X| x |Y|. H(X|Y) = H(X,Y) - H(Y).
double CondEntropy(const Eigen::MatrixXd& joint_xy);
double MutualInfo(const Eigen::MatrixXd& joint_xy);

// Sum_z P_Z(z) Sum_x P(x|z) (-log P_Y|Z(x|z)). `post` and `pred` are both
// |Z| x |X|.
double CrossEntropy(const DiscreteDist& p_z, const CondTable& post,
                    const CondTable& pred);

// 1 - Sum_y max_x P(x, y).
double BayesError(const Eigen::MatrixXd& joint_xy);

struct SanthiVardy {
  double bayes_error;
  double bound;  // 1 - 2^{-H(X|Y)} with H in bits
};
SanthiVardy SanthiVardyGap(const Eigen::MatrixXd& joint_xy);

// Target (one-hot) and prediction matrices of a batch, N' x |X|.
struct BatchMats {
  Eigen::MatrixXd targets;
  Eigen::MatrixXd predictions;

  // Checks the one-hot / row-stochastic invariants.
  void Validate() const;
  static BatchMats FromLabels(std::span<const int> labels,
                              const Eigen::MatrixXd& predictions);
};

struct BatchEstimate {
  Eigen::VectorXd p_x;
  Eigen::VectorXd p_y;
  Eigen::MatrixXd p_xy;
};
BatchEstimate EstimateBatch(const BatchMats& b);

// I(X;Y) from the batch estimates. The gradient overload also fills
// d I / d predictions (N' x |X|).
double BatchMutualInfo(const BatchMats& b);
double BatchMutualInfo(const BatchMats& b, Eigen::MatrixXd* grad_predictions);

}  // namespace locpriv

#endif  // LOCPRIV_INFO_THEORY_H_
