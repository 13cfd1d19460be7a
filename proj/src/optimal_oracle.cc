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

#include "locpriv/optimal_oracle.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "locpriv/error.h"
#include "locpriv/info_theory.h"
#include "locpriv/rng.h"

namespace locpriv {
namespace {

constexpr double kTieTol = 1e-9;

// Euclidean projection of v onto the probability simplex.
void ProjectSimplex(Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> v) {
  const Eigen::Index n = v.size();
  std::vector<double> u(n);
  for (Eigen::Index j = 0; j < n; ++j) u[j] = v(j);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0, theta = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    cumsum += u[j];
    const double t = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  for (Eigen::Index j = 0; j < n; ++j) v(j) = std::max(v(j) - theta, 0.0);
}

Eigen::MatrixXd ProjectRows(Eigen::MatrixXd m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) ProjectSimplex(m.row(r));
  return m;
}

// Projection onto {row-stochastic} ∩ {sum(cost .* M) <= budget}, via
// bisection on the multiplier of the budget constraint.
Eigen::MatrixXd ProjectFeasible(const Eigen::MatrixXd& v, const Eigen::MatrixXd& cost,
                                double budget) {
  Eigen::MatrixXd m = ProjectRows(v);
  if (cost.cwiseProduct(m).sum() <= budget) return m;
  double lo = 0.0, hi = 1.0;
  while (cost.cwiseProduct(ProjectRows(v - hi * cost)).sum() > budget) {
    hi *= 2.0;
    if (hi > 1e12) break;
  }
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (cost.cwiseProduct(ProjectRows(v - mid * cost)).sum() > budget) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return ProjectRows(v - hi * cost);
}

struct Candidate {
  Eigen::MatrixXd mech;
  double bayes = -1.0;
  double mi = std::numeric_limits<double>::infinity();

  void Offer(const TinyInstance& inst, const Eigen::MatrixXd& m) {
    const double b = InstanceBayesError(inst, m);
    if (b < bayes - kTieTol) return;
    const double i = InstanceMutualInfo(inst, m);
    if (b > bayes + kTieTol || i < mi - 1e-12) {
      mech = m;
      bayes = b;
      mi = i;
    }
  }
};

// All compositions of `total` into `parts` non-negative integers.
void Compositions(int total, int parts, std::vector<int>& cur,
                  std::vector<std::vector<int>>& out) {
  if (parts == 1) {
    cur.push_back(total);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int k = 0; k <= total; ++k) {
    cur.push_back(k);
    Compositions(total - k, parts - 1, cur, out);
    cur.pop_back();
  }
}

double LatticeSize(int total, int n) {
  // C(total + n - 1, n - 1) ^ n
  double row = 1.0;
  for (int i = 1; i < n; ++i) row = row * (total + i) / i;
  return std::pow(row, n);
}

void SearchLattice(const TinyInstance& inst, int total, Candidate& best) {
  const int n = static_cast<int>(inst.locations.size());
  std::vector<std::vector<int>> rows;
  std::vector<int> cur;
  Compositions(total, n, cur, rows);
  const Eigen::MatrixXd d = inst.DistanceTable();
  const double inv = 1.0 / total;
  // Per (location, row choice) distortion contribution.
  std::vector<std::vector<double>> row_cost(n, std::vector<double>(rows.size()));
  for (int w = 0; w < n; ++w)
    for (std::size_t k = 0; k < rows.size(); ++k) {
      double c = 0.0;
      for (int z = 0; z < n; ++z) c += rows[k][z] * inv * d(w, z);
      row_cost[w][k] = inst.p_w[w] * c;
    }
  std::vector<std::size_t> idx(n, 0);
  Eigen::MatrixXd m(n, n);
  while (true) {
    double cost = 0.0;
    for (int w = 0; w < n; ++w) cost += row_cost[w][idx[w]];
    if (cost <= inst.budget_m + 1e-9) {
      for (int w = 0; w < n; ++w)
        for (int z = 0; z < n; ++z) m(w, z) = rows[idx[w]][z] * inv;
      best.Offer(inst, m);
    }
    int w = 0;
    while (w < n && ++idx[w] == rows.size()) idx[w++] = 0;
    if (w == n) break;
  }
}

void ProjectedAscent(const TinyInstance& inst, const OracleOptions& opts,
                     Candidate& best) {
  const int n = static_cast<int>(inst.locations.size());
  const Eigen::MatrixXd joint = inst.JointXW();  // |X| x |W|
  Eigen::MatrixXd cost = inst.DistanceTable();
  for (int w = 0; w < n; ++w) cost.row(w) *= inst.p_w[w];
  Rng rng(DeriveSeed(opts.seed, "oracle-restarts"));
  constexpr double kTau0 = 5e-2, kTau1 = 1e-5;
  for (int r = 0; r < opts.restarts; ++r) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
    if (r > 0) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = -std::log(1.0 - rng.Uniform());
      for (int i = 0; i < n; ++i) m.row(i) /= m.row(i).sum();
      m = ProjectFeasible(m, cost, inst.budget_m);
    }
    best.Offer(inst, m);
    for (int t = 0; t < opts.ascent_iterations; ++t) {
      const double frac = static_cast<double>(t) / opts.ascent_iterations;
      const double tau = kTau0 * std::pow(kTau1 / kTau0, frac);
      const double eta = 0.5 * (1.0 - frac) + 0.01;
      const Eigen::MatrixXd pxz = joint * m;
      // Gradient of sum_z tau * logsumexp_x(P(x,z) / tau), to be descended.
      Eigen::MatrixXd soft(pxz.rows(), pxz.cols());
      for (Eigen::Index z = 0; z < pxz.cols(); ++z) {
        const double mx = pxz.col(z).maxCoeff();
        soft.col(z) = ((pxz.col(z).array() - mx) / tau).exp().matrix();
        soft.col(z) /= soft.col(z).sum();
      }
      const Eigen::MatrixXd grad = joint.transpose() * soft;
      m = ProjectFeasible(m - eta * grad, cost, inst.budget_m);
      if (t % 50 == 49) best.Offer(inst, m);
    }
    best.Offer(inst, m);
  }
}

Eigen::MatrixXd JointXZ(const TinyInstance& inst, const Eigen::MatrixXd& mech) {
  return inst.JointXW() * mech;
}

}  // namespace

void TinyInstance::Validate() const {
  const std::size_t n = locations.size();
  Require(n >= 1 && n <= 6, "TinyInstance: between 1 and 6 locations");
  Require(p_w.size() == n && class_of.size() == n, "TinyInstance: size mismatch");
  Require(num_classes >= 1, "TinyInstance: no classes");
  Require(budget_m >= 0.0, "TinyInstance: budget L must be non-negative");
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    Require(p_w[i] >= 0.0, "TinyInstance: negative probability");
    Require(class_of[i] >= 0 && class_of[i] < num_classes,
            "TinyInstance: class out of range");
    Require(locations[i].IsFinite(), "TinyInstance: non-finite location");
    total += p_w[i];
  }
  Require(std::abs(total - 1.0) <= 1e-9, "TinyInstance: prior must sum to one");
}

Eigen::MatrixXd TinyInstance::DistanceTable() const {
  return DistanceMatrix(locations, locations);
}

Eigen::MatrixXd TinyInstance::JointXW() const {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(num_classes, locations.size());
  for (std::size_t w = 0; w < locations.size(); ++w) j(class_of[w], w) = p_w[w];
  return j;
}

double TinyInstance::MaxPrior() const {
  return JointXW().rowwise().sum().maxCoeff();
}

TinyInstance TinyInstance::OnePerClass(std::vector<Location> locations,
                                       double budget_m) {
  TinyInstance inst;
  const std::size_t n = locations.size();
  inst.locations = std::move(locations);
  inst.p_w.assign(n, 1.0 / static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) inst.class_of.push_back(static_cast<int>(i));
  inst.num_classes = static_cast<int>(n);
  inst.budget_m = budget_m;
  return inst;
}

double InstanceBayesError(const TinyInstance& inst, const Eigen::MatrixXd& mech) {
  return BayesError(JointXZ(inst, mech));
}

double InstanceDistortion(const TinyInstance& inst, const Eigen::MatrixXd& mech) {
  const Eigen::MatrixXd d = inst.DistanceTable();
  double total = 0.0;
  for (Eigen::Index w = 0; w < mech.rows(); ++w)
    total += inst.p_w[w] * mech.row(w).dot(d.row(w));
  return total;
}

double InstanceMutualInfo(const TinyInstance& inst, const Eigen::MatrixXd& mech) {
  return MutualInfo(JointXZ(inst, mech));
}

OracleResult OptimalBayesMechanism(const TinyInstance& inst, const OracleOptions& opts) {
  Require(inst.budget_m >= 0.0, "OptimalBayesMechanism: budget L must be non-negative");
  inst.Validate();
  Require(opts.step > 0.0 && opts.step <= 0.5, "OptimalBayesMechanism: bad step");
  const int total = static_cast<int>(std::lround(1.0 / opts.step));
  const int n = static_cast<int>(inst.locations.size());
  Candidate best;
  OracleResult result;
  if (LatticeSize(total, n) <= opts.max_lattice_points) {
    SearchLattice(inst, total, best);
    result.exhaustive = true;
  } else {
    Require(opts.restarts > 0 && opts.ascent_iterations > 0,
            "OptimalBayesMechanism: ascent needs restarts and iterations");
    ProjectedAscent(inst, opts, best);
  }
  result.mechanism = CondTable(best.mech);
  result.bayes_error = best.bayes;
  result.distortion_m = InstanceDistortion(inst, best.mech);
  result.mutual_info = best.mi;
  return result;
}

GameValueBounds ComputeGameValueBounds(const TinyInstance& inst,
                                       const OracleOptions& opts) {
  const OracleResult r = OptimalBayesMechanism(inst, opts);
  return {r.bayes_error, r.mutual_info, 1.0 - inst.MaxPrior()};
}

PayoffTables PayoffTablesDemo() {
  // Two users A, B at locations a, b with equal prior.
  const std::array<std::array<int, 2>, 4> g_maps{{{0, 1}, {0, 0}, {1, 1}, {1, 0}}};
  const std::array<std::array<int, 2>, 4> c_maps{{{0, 1}, {0, 0}, {1, 1}, {1, 0}}};
  PayoffTables t{{"identity", "collapse-a", "collapse-b", "swap"},
                 {"identity", "const-A", "const-B", "swap"},
                 {}, {}, {}};
  for (int g = 0; g < 4; ++g)
    for (int c = 0; c < 4; ++c) {
      Eigen::MatrixXd pxy = Eigen::MatrixXd::Zero(2, 2);
      double success = 0.0;
      for (int x = 0; x < 2; ++x) {
        const int y = c_maps[c][g_maps[g][x]];
        pxy(x, y) += 0.5;
        if (y == x) success += 0.5;
      }
      t.success(g, c) = success;
      t.mutual_info(g, c) = NatsToBits(MutualInfo(pxy));
      t.one_minus_bayes(g, c) = 1.0 - BayesError(pxy);
    }
  return t;
}

std::string FormatPayoffTablesText(const PayoffTables& t) {
  std::ostringstream out;
  const auto table = [&](const std::string& title, const Eigen::Matrix4d& m) {
    out << title << '\n' << std::setw(12) << "G \\ C";
    for (const auto& c : t.classifier_names) out << std::setw(10) << c;
    out << '\n';
    for (int g = 0; g < 4; ++g) {
      out << std::setw(12) << t.generator_names[g];
      for (int c = 0; c < 4; ++c) out << std::setw(10) << std::fixed
                                      << std::setprecision(3) << m(g, c);
      out << '\n';
    }
    out << '\n';
  };
  table("success probability P(Y = X)", t.success);
  table("I(X;Y) [bits]", t.mutual_info);
  table("1 - B(X|Y)", t.one_minus_bayes);
  return out.str();
}

std::string FormatPayoffTablesCsv(const PayoffTables& t) {
  std::ostringstream out;
  out << "table,generator,classifier,value\n";
  const auto rows = [&](const char* name, const Eigen::Matrix4d& m) {
    for (int g = 0; g < 4; ++g)
      for (int c = 0; c < 4; ++c)
        out << name << ',' << t.generator_names[g] << ',' << t.classifier_names[c]
            << ',' << m(g, c) << '\n';
  };
  rows("success", t.success);
  rows("mutual_info_bits", t.mutual_info);
  rows("one_minus_bayes", t.one_minus_bayes);
  return out.str();
}

}  // namespace locpriv
