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

#ifndef LOCPRIV_OPTIMAL_ORACLE_H_
#define LOCPRIV_OPTIMAL_ORACLE_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "locpriv/core_model.h"

namespace locpriv {

// A handful of locations, each owned by one class. The mechanism maps the
// locations onto themselves.
struct TinyInstance {
  std::vector<Location> locations;
  std::vector<double> p_w;     // probability of each location
  std::vector<int> class_of;   // location -> class
  int num_classes = 0;
  double budget_m = 0.0;

  void Validate() const;
  Eigen::MatrixXd DistanceTable() const;
  // |X| x |W| joint of class and location.
  Eigen::MatrixXd JointXW() const;
  double MaxPrior() const;

  // Uniform prior, location i owned by class i.
  static TinyInstance OnePerClass(std::vector<Location> locations, double budget_m);
};

double InstanceBayesError(const TinyInstance& inst, const Eigen::MatrixXd& mech);
double InstanceDistortion(const TinyInstance& inst, const Eigen::MatrixXd& mech);
double InstanceMutualInfo(const TinyInstance& inst, const Eigen::MatrixXd& mech);

struct OracleOptions {
  double step = 1e-3;
  // Exhaustive lattice search is used while the lattice has at most this
  // many points; otherwise projected ascent.
  double max_lattice_points = 2e7;
  int restarts = 32;
  int ascent_iterations = 3000;
  std::uint64_t seed = 0;
};

struct OracleResult {
  CondTable mechanism;
  double bayes_error = 0.0;
  double distortion_m = 0.0;
  double mutual_info = 0.0;  // I(X;Z), nats
  bool exhaustive = false;
};

// Maximizes B(X|Z) subject to expected distortion <= L. Among lattice maxima
// the one with the smallest I(X;Z) is returned.
OracleResult OptimalBayesMechanism(const TinyInstance& inst,
                                   const OracleOptions& opts = {});

struct GameValueBounds {
  double max_bayes_error = 0.0;
  double mutual_info_at_optimum = 0.0;  // nats
  double ceiling = 0.0;                 // 1 - max prior
};
GameValueBounds ComputeGameValueBounds(const TinyInstance& inst,
                                       const OracleOptions& opts = {});

// Payoffs of the two-user example for the four deterministic strategies of
// each player. Rows: generator, columns: classifier.
struct PayoffTables {
  std::array<std::string, 4> generator_names;
  std::array<std::string, 4> classifier_names;
  Eigen::Matrix4d success;      // P(Y = X)
  Eigen::Matrix4d mutual_info;  // I(X;Y) in bits
  Eigen::Matrix4d one_minus_bayes;
};
PayoffTables PayoffTablesDemo();
std::string FormatPayoffTablesText(const PayoffTables& t);
std::string FormatPayoffTablesCsv(const PayoffTables& t);

}  // namespace locpriv

#endif  // LOCPRIV_OPTIMAL_ORACLE_H_
