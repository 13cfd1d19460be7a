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

#include <chrono>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "locpriv/error.h"
#include "locpriv/info_theory.h"

namespace locpriv {
namespace {

TinyInstance TwoPoint(double budget) {
  return TinyInstance::OnePerClass({{0, 0}, {100, 0}}, budget);
}

TinyInstance Square4(double budget) {
  return TinyInstance::OnePerClass({{150, 150}, {-150, 150}, {-150, -150}, {150, -150}},
                                   budget);
}

TEST(TinyInstanceTest, Validation) {
  EXPECT_NO_THROW(TwoPoint(40).Validate());
  EXPECT_THROW(TwoPoint(-1).Validate(), ContractError);
  std::vector<Location> seven(7);
  for (int i = 0; i < 7; ++i) seven[i] = {10.0 * i, 0};
  EXPECT_THROW(TinyInstance::OnePerClass(seven, 10).Validate(), ContractError);
  const Eigen::MatrixXd d = Square4(0).DistanceTable();
  EXPECT_TRUE(d.isApprox(d.transpose()));
  EXPECT_DOUBLE_EQ(d.diagonal().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_DOUBLE_EQ(d(0, 2), std::hypot(300.0, 300.0));
}

TEST(InstanceMeasuresTest, TwoFifthsSwapMechanism) {
  Eigen::MatrixXd mech(2, 2);
  mech << 0.6, 0.4, 0.4, 0.6;
  const TinyInstance inst = TwoPoint(40);
  // B = 1 - 2 * (1/2 * 3/5).
  EXPECT_NEAR(InstanceBayesError(inst, mech), 0.4, 1e-12);
  EXPECT_NEAR(InstanceDistortion(inst, mech), 40.0, 1e-12);
  const double h = -(0.6 * std::log(0.6) + 0.4 * std::log(0.4));
  EXPECT_NEAR(InstanceMutualInfo(inst, mech), std::numbers::ln2 - h, 1e-12);
}

TEST(OptimalBayesMechanismTest, TwoPointWorkedExample) {
  const auto t0 = std::chrono::steady_clock::now();
  const OracleResult r = OptimalBayesMechanism(TwoPoint(40));
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_TRUE(r.exhaustive);
  EXPECT_NEAR(r.mechanism(0, 1), 0.4, 1e-3);
  EXPECT_NEAR(r.mechanism(1, 0), 0.4, 1e-3);
  EXPECT_NEAR(r.bayes_error, 0.4, 1e-3);
  EXPECT_LE(r.distortion_m, 40.0 + 1e-9);
  EXPECT_LT(secs, 5.0);
}

TEST(OptimalBayesMechanismTest, GenerousTwoPointBudgetReachesCeiling) {
  for (double budget : {50.0, 75.0, 200.0}) {
    const OracleResult r = OptimalBayesMechanism(TwoPoint(budget));
    EXPECT_NEAR(r.bayes_error, 0.5, 1e-9) << budget;
    // Among optimal mechanisms the least informative one is returned.
    EXPECT_NEAR(r.mutual_info, 0.0, 1e-9) << budget;
  }
}

TEST(OptimalBayesMechanismTest, ZeroBudgetForcesIdentity) {
  const OracleResult r = OptimalBayesMechanism(TwoPoint(0));
  EXPECT_NEAR(r.bayes_error, 0.0, 1e-12);
  EXPECT_NEAR(r.distortion_m, 0.0, 1e-12);
  EXPECT_THROW(OptimalBayesMechanism(TwoPoint(-1)), ContractError);
}

TEST(GameValueBoundsTest, GenerousBudgetsGiveUniformCeiling) {
  const GameValueBounds four = ComputeGameValueBounds(Square4(1000));
  EXPECT_NEAR(four.max_bayes_error, 0.75, 1e-3);
  EXPECT_DOUBLE_EQ(four.ceiling, 0.75);
  std::vector<Location> hexagon;
  for (int i = 0; i < 6; ++i)
    hexagon.push_back({100.0 * std::cos(i * std::numbers::pi / 3),
                       100.0 * std::sin(i * std::numbers::pi / 3)});
  const GameValueBounds six = ComputeGameValueBounds(TinyInstance::OnePerClass(hexagon, 1000));
  EXPECT_NEAR(six.max_bayes_error, 5.0 / 6.0, 1e-3);
}

// Cross-checked against an independent linear-programming solve on the same
// support. Mixing each vertex with its two neighbours costs 150 m per unit of
// mass moved along a side, so L just above 150 m already buys more confusion
// than the two-by-two mixing that gives 0.5.
TEST(GameValueBoundsTest, SquareAtIntermediateBudgets) {
  struct Case {
    double budget, bayes;
  };
  for (const Case& c : {Case{150, 0.5}, Case{173, 0.576667}, Case{212, 0.68449},
                        Case{300, 0.75}}) {
    const OracleResult r = OptimalBayesMechanism(Square4(c.budget));
    EXPECT_FALSE(r.exhaustive);
    EXPECT_NEAR(r.bayes_error, c.bayes, 2e-3) << c.budget;
    EXPECT_LE(r.distortion_m, c.budget * (1 + 1e-6)) << c.budget;
  }
}

TEST(OracleInvariantTest, BudgetActiveOrCeilingReached) {
  const OracleOptions opts;
  for (double budget : {10.0, 25.0, 40.0, 49.0, 60.0}) {
    const TinyInstance inst = TwoPoint(budget);
    const OracleResult r = OptimalBayesMechanism(inst, opts);
    const double max_d = inst.DistanceTable().maxCoeff();
    const bool active = r.distortion_m >= budget - 2 * opts.step * max_d - 1e-9 &&
                        r.distortion_m <= budget + 1e-9;
    const bool ceiling = std::abs(r.bayes_error - (1.0 - inst.MaxPrior())) < 1e-9;
    EXPECT_TRUE(active || ceiling) << budget;
  }
}

// Mutual information with a classifier that reports a draw from the exact
// posterior never exceeds I(X;Z), so the inner maximum over classifiers is
// bounded by min over G of I(X;Z).
TEST(OracleInvariantTest, ClassifierInformationBoundedByMechanismInformation) {
  const TinyInstance inst = TwoPoint(40);
  const Eigen::MatrixXd pxw = inst.JointXW();
  double min_izx = 1e9, min_ixy = 1e9;
  for (int i = 0; i <= 100; ++i)
    for (int j = 0; j <= 100; ++j) {
      Eigen::MatrixXd mech(2, 2);
      mech << 1 - i / 100.0, i / 100.0, j / 100.0, 1 - j / 100.0;
      if (InstanceDistortion(inst, mech) > inst.budget_m + 1e-9) continue;
      const Eigen::MatrixXd pxz = pxw * mech;
      Eigen::MatrixXd post = pxz;  // columns normalized: P(x | z)
      for (int z = 0; z < 2; ++z)
        if (post.col(z).sum() > 0) post.col(z) /= post.col(z).sum();
      const Eigen::MatrixXd pxy = pxz * post.transpose();
      const double izx = MutualInfo(pxz), ixy = MutualInfo(pxy);
      EXPECT_LE(ixy, izx + 1e-12);
      min_izx = std::min(min_izx, izx);
      min_ixy = std::min(min_ixy, ixy);
    }
  EXPECT_GE(min_izx, min_ixy - 1e-12);
  EXPECT_NEAR(min_izx, OptimalBayesMechanism(inst).mutual_info, 1e-3);
}

TEST(PayoffTablesTest, ReproducesFigureEntries) {
  const PayoffTables t = PayoffTablesDemo();
  const int kIdentity = 0, kCollapseA = 1, kSwap = 3;
  EXPECT_DOUBLE_EQ(t.success(kIdentity, kIdentity), 1.0);
  EXPECT_NEAR(t.mutual_info(kIdentity, kIdentity), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(t.one_minus_bayes(kIdentity, kIdentity), 1.0);
  for (int c = 0; c < 4; ++c) {
    EXPECT_DOUBLE_EQ(t.success(kCollapseA, c), 0.5);
    EXPECT_NEAR(t.mutual_info(kCollapseA, c), 0.0, 1e-12);
    EXPECT_DOUBLE_EQ(t.one_minus_bayes(kCollapseA, c), 0.5);
  }
  EXPECT_DOUBLE_EQ(t.success(kSwap, kIdentity), 0.0);
  EXPECT_NEAR(t.mutual_info(kSwap, kIdentity), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(t.one_minus_bayes(kSwap, kIdentity), 1.0);
  EXPECT_DOUBLE_EQ(t.success(kSwap, kSwap), 1.0);
  // Constant classifiers carry no information whatever G does.
  for (int g = 0; g < 4; ++g) {
    EXPECT_NEAR(t.mutual_info(g, 1), 0.0, 1e-12);
    EXPECT_DOUBLE_EQ(t.one_minus_bayes(g, 2), 0.5);
  }
  const std::string csv = FormatPayoffTablesCsv(t);
  EXPECT_NE(csv.find("swap"), std::string::npos);
  EXPECT_FALSE(FormatPayoffTablesText(t).empty());
}

}  // namespace
}  // namespace locpriv
