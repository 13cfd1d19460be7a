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

#include <gtest/gtest.h>

#include "locpriv/dataset.h"
#include "locpriv/error.h"
#include "test_util.h"

namespace locpriv {
namespace {

using testing::RandomJoint;
using testing::RandomStochastic;

TEST(LocationTest, NormalizedRoundTrip) {
  const Location p{1625.0, -3250.0};
  const Eigen::Vector2d n = p.Normalized(6500.0);
  EXPECT_DOUBLE_EQ(n.x(), 0.5);
  EXPECT_DOUBLE_EQ(n.y(), -1.0);
  EXPECT_EQ(Location::FromNormalized(n.x(), n.y(), 6500.0), p);
}

TEST(DiscreteDistTest, RejectsBadVectors) {
  EXPECT_THROW(DiscreteDist({0.5, 0.6}), ContractError);
  EXPECT_THROW(DiscreteDist({1.5, -0.5}), ContractError);
  EXPECT_THROW(DiscreteDist({std::nan(""), 1.0}), ContractError);
  EXPECT_NO_THROW(DiscreteDist({0.25, 0.75}));
}

TEST(CondTableTest, RowsMustBeStochastic) {
  Eigen::MatrixXd m(2, 2);
  m << 0.5, 0.5, 0.2, 0.7;
  EXPECT_THROW(CondTable{m}, ContractError);
  const CondTable mix = CondTable::Mix(CondTable::Identity(3), CondTable::UniformRows(3, 3), 0.3);
  for (std::size_t r = 0; r < 3; ++r) EXPECT_NEAR(mix.matrix().row(r).sum(), 1.0, 1e-12);
}

TEST(DeriveJointTest, IdentityChannelsGiveDiagonalExtension) {
  Eigen::MatrixXd pxw = Eigen::MatrixXd::Identity(2, 2) * 0.5;
  const JointTable j = DeriveJoint(pxw, CondTable::Identity(2), CondTable::Identity(2));
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t w = 0; w < 2; ++w)
      for (std::size_t z = 0; z < 2; ++z)
        for (std::size_t y = 0; y < 2; ++y)
          EXPECT_DOUBLE_EQ(j.at(x, w, z, y), (x == w && w == z && z == y) ? 0.5 : 0.0);
}

TEST(DeriveJointTest, ConstantMechanismMakesZIndependentOfW) {
  Rng rng(3);
  const Eigen::MatrixXd pxw = RandomJoint(2, 3, rng);
  const JointTable j =
      DeriveJoint(pxw, CondTable::Constant(3, 4, 2), CondTable(RandomStochastic(4, 2, rng)));
  const Eigen::MatrixXd wz = j.MarginalWZ();
  const Eigen::VectorXd pw = wz.rowwise().sum();
  const Eigen::RowVectorXd pz = wz.colwise().sum();
  EXPECT_NEAR((wz - pw * pz).cwiseAbs().maxCoeff(), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(pz(2), 1.0);
}

TEST(DeriveJointTest, MatchesTripleLoopOracle) {
  Rng rng(11);
  const Eigen::MatrixXd pxw = RandomJoint(2, 2, rng);
  const Eigen::MatrixXd mech = RandomStochastic(2, 2, rng);
  const Eigen::MatrixXd pred = RandomStochastic(2, 2, rng);
  const JointTable j = DeriveJoint(pxw, CondTable(mech), CondTable(pred));
  double worst = 0.0;
  for (int x = 0; x < 2; ++x)
    for (int w = 0; w < 2; ++w)
      for (int z = 0; z < 2; ++z)
        for (int y = 0; y < 2; ++y)
          worst = std::max(worst, std::abs(j.at(x, w, z, y) - pxw(x, w) * mech(w, z) * pred(z, y)));
  EXPECT_LT(worst, 1e-12);
  EXPECT_NEAR(j.Total(), 1.0, 1e-12);
  EXPECT_LT((j.MarginalXW() - pxw).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(DeriveJointTest, DimensionMismatchIsContractError) {
  const Eigen::MatrixXd pxw = Eigen::MatrixXd::Constant(2, 3, 1.0 / 6.0);
  EXPECT_THROW(DeriveJoint(pxw, CondTable::Identity(2), CondTable::Identity(2)),
               ContractError);
  EXPECT_THROW(DeriveJoint(pxw, CondTable::Identity(3), CondTable::Identity(2)),
               ContractError);
}

TEST(PosteriorTest, IdentityChannelGivesIdentityPosterior) {
  const Eigen::MatrixXd pxw = Eigen::MatrixXd::Identity(3, 3) / 3.0;
  const JointTable j = DeriveJoint(pxw, CondTable::Identity(3), CondTable::Identity(3));
  const Posterior post = PosteriorXGivenZ(j);
  EXPECT_LT((post.table.matrix() - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(PosteriorTest, CollapsedChannelCarriesNoInformation) {
  const Eigen::MatrixXd pxw = Eigen::MatrixXd::Identity(2, 2) * 0.5;
  const JointTable j = DeriveJoint(pxw, CondTable::Constant(2, 2, 0), CondTable::Identity(2));
  const Posterior post = PosteriorXGivenZ(j);
  EXPECT_DOUBLE_EQ(post.table(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(post.table(0, 1), 0.5);
  // z = 1 never occurs: uniform row, flagged.
  EXPECT_TRUE(post.zero_mass[1]);
  EXPECT_FALSE(post.zero_mass[0]);
  EXPECT_DOUBLE_EQ(post.table(1, 0), 0.5);
}

TEST(PosteriorTest, MatchesBayesRuleOracle) {
  Rng rng(5);
  const Eigen::MatrixXd pxw = RandomJoint(3, 3, rng);
  const Eigen::MatrixXd mech = RandomStochastic(3, 3, rng);
  const JointTable j = DeriveJoint(pxw, CondTable(mech), CondTable::Identity(3));
  const Posterior post = PosteriorXGivenZ(j);
  // P(x|z) = P(z|x) P(x) / P(z) with P(z|x) = sum_w P(w|x) mech(z|w).
  const Eigen::VectorXd px = pxw.rowwise().sum();
  double worst = 0.0;
  for (int z = 0; z < 3; ++z) {
    double pz = 0.0;
    Eigen::VectorXd num(3);
    for (int x = 0; x < 3; ++x) {
      double pz_given_x = 0.0;
      for (int w = 0; w < 3; ++w) pz_given_x += pxw(x, w) / px(x) * mech(w, z);
      num(x) = pz_given_x * px(x);
      pz += num(x);
    }
    for (int x = 0; x < 3; ++x) worst = std::max(worst, std::abs(post.table(z, x) - num(x) / pz));
  }
  EXPECT_LT(worst, 1e-12);
  const DiscreteDist mx = MarginalX(j);
  for (int x = 0; x < 3; ++x) EXPECT_NEAR(mx[x], px(x), 1e-12);
}

TEST(ExpectedDistortionTest, IdentityIsZero) {
  const std::vector<Location> locs{{0, 0}, {100, 0}, {0, 50}};
  EXPECT_DOUBLE_EQ(
      ExpectedDistortion(DiscreteDist::Uniform(3), CondTable::Identity(3), locs, locs), 0.0);
}

TEST(ExpectedDistortionTest, TwoPointSwapGivesFortyMeters) {
  const std::vector<Location> locs{{0, 0}, {100, 0}};
  Eigen::MatrixXd m(2, 2);
  m << 0.6, 0.4, 0.4, 0.6;
  EXPECT_NEAR(ExpectedDistortion(DiscreteDist::Uniform(2), CondTable(m), locs, locs), 40.0,
              1e-12);
}

TEST(ExpectedDistortionTest, MatchesBruteForceSum) {
  Rng rng(8);
  std::vector<Location> locs;
  for (int i = 0; i < 4; ++i) locs.push_back({rng.Uniform(-500, 500), rng.Uniform(-500, 500)});
  const Eigen::MatrixXd m = RandomStochastic(4, 4, rng);
  const Eigen::MatrixXd pw = RandomStochastic(1, 4, rng);
  const DiscreteDist p(std::vector<double>(pw.data(), pw.data() + 4));
  double oracle = 0.0;
  for (int w = 0; w < 4; ++w)
    for (int z = 0; z < 4; ++z)
      oracle += pw(0, w) * m(w, z) *
                std::sqrt(std::pow(locs[w].x_m - locs[z].x_m, 2) + std::pow(locs[w].y_m - locs[z].y_m, 2));
  EXPECT_NEAR(ExpectedDistortion(p, CondTable(m), locs, locs), oracle, 1e-12);
}

TEST(ConvexityTest, BudgetSetIsClosedUnderMixing) {
  Rng rng(21);
  std::vector<Location> locs;
  for (int i = 0; i < 4; ++i) locs.push_back({rng.Uniform(-300, 300), rng.Uniform(-300, 300)});
  const DiscreteDist p = DiscreteDist::Uniform(4);
  for (int trial = 0; trial < 100; ++trial) {
    const CondTable a(RandomStochastic(4, 4, rng)), b(RandomStochastic(4, 4, rng));
    const double L = std::max(ExpectedDistortion(p, a, locs, locs),
                              ExpectedDistortion(p, b, locs, locs));
    for (double lambda : {0.0, 0.1, 0.5, 0.9, 1.0})
      EXPECT_LE(ExpectedDistortion(p, CondTable::Mix(a, b, lambda), locs, locs), L + 1e-9);
  }
}

TEST(EmpiricalModelTest, MergesDuplicatesWithWeightOneOverN) {
  Dataset d;
  d.num_classes = 2;
  d.samples = {{0, {0, 0}}, {0, {0, 0}}, {1, {10, 0}}, {1, {0, 0}}};
  const EmpiricalModel m = BuildEmpiricalModel(d);
  ASSERT_EQ(m.support.size(), 2u);
  EXPECT_DOUBLE_EQ(m.joint_xw.sum(), 1.0);
  EXPECT_DOUBLE_EQ(m.joint_xw(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(m.joint_xw(1, 0), 0.25);
  EXPECT_DOUBLE_EQ(m.joint_xw(1, 1), 0.25);
}

TEST(DatasetTest, TrainSplitMustCoverEveryClass) {
  Dataset d;
  d.num_classes = 3;
  d.samples = {{0, {0, 0}}, {1, {1, 1}}};
  EXPECT_THROW(d.Validate(), ContractError);
  d.split = Split::kTest;
  EXPECT_NO_THROW(d.Validate());
  d.samples.push_back({3, {0, 0}});
  EXPECT_THROW(d.Validate(), ContractError);
}

TEST(DatasetTest, CsvRoundTripWithSidecar) {
  const auto dir = testing::TempDir("dataset_csv");
  Dataset d;
  d.num_classes = 2;
  d.seed = 42;
  d.split = Split::kVal;
  d.region.side_m = 4500.0;
  d.samples = {{0, {0.1, -2.5}}, {1, {1e-7, 1234.5678}}};
  WriteDatasetCsv(d, dir / "d.csv", "unit test");
  const Dataset r = ReadDatasetCsv(dir / "d.csv");
  EXPECT_EQ(r.num_classes, 2);
  EXPECT_EQ(r.seed, 42u);
  EXPECT_EQ(r.split, Split::kVal);
  EXPECT_DOUBLE_EQ(r.region.side_m, 4500.0);
  ASSERT_EQ(r.samples.size(), 2u);
  EXPECT_EQ(r.samples[1].location, d.samples[1].location);
  const std::string text = testing::ReadFile(dir / "d.csv");
  EXPECT_EQ(text.rfind("# unit test\nclass_id,x_m,y_m\n", 0), 0u);
}

TEST(DatasetTest, MalformedCsvIsDataError) {
  const auto dir = testing::TempDir("dataset_bad");
  std::ofstream(dir / "bad.csv") << "class_id,x_m,y_m\n0,1,notanumber\n";
  EXPECT_THROW(ReadDatasetCsv(dir / "bad.csv"), DataError);
  std::ofstream(dir / "hdr.csv") << "a,b,c\n";
  EXPECT_THROW(ReadDatasetCsv(dir / "hdr.csv"), DataError);
}

}  // namespace
}  // namespace locpriv
