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

#include "locpriv/adversarial.h"

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "locpriv/data_pipeline.h"
#include "locpriv/error.h"
#include "locpriv/evaluation.h"
#include "locpriv/info_theory.h"
#include "test_util.h"

namespace locpriv {
namespace {

Eigen::MatrixXd NormalizedInputs(const Dataset& d) {
  Eigen::MatrixXd m(d.samples.size(), 2);
  for (std::size_t i = 0; i < d.samples.size(); ++i)
    m.row(i) = d.samples[i].location.Normalized(d.region.side_m).transpose();
  return m;
}

std::vector<int> Labels(const Dataset& d) {
  std::vector<int> out;
  for (const auto& s : d.samples) out.push_back(s.class_id);
  return out;
}

// Small synthetic splits: 4 clusters, 60 samples per class.
DatasetSplits SmallSynthetic(std::uint64_t seed) {
  SyntheticSpec spec;
  spec.samples_per_class = 60;
  spec.test_per_class = 12;
  spec.seed = seed;
  return GenSynthetic(spec);
}

TEST(SoftplusTest, ClosedForms) {
  EXPECT_NEAR(SoftplusPenalty(270.0, 270.0), std::numbers::ln2, 1e-15);
  EXPECT_NEAR(SoftplusPenalty(250.0, 270.0), 2.0611536e-9, 1e-15);
  EXPECT_NEAR(SoftplusPenalty(5.0, 0.0), 5.00671535, 1e-8);
  EXPECT_DOUBLE_EQ(SoftplusPenalty(1e4, 0.0), 1e4);
  EXPECT_TRUE(std::isfinite(SoftplusPenalty(-1e4, 0.0)));
  EXPECT_GT(SoftplusPenalty(-1e3, 0.0), -1.0);
  EXPECT_DOUBLE_EQ(SoftplusPenaltyGrad(0.0, 0.0), 0.5);
  EXPECT_DOUBLE_EQ(SoftplusPenaltyGrad(1e4, 0.0), 1.0);
  EXPECT_NEAR(SoftplusPenaltyGrad(3.0, 1.0), 1.0 / (1.0 + std::exp(-2.0)), 1e-15);
  for (double a = -30; a < 30; a += 0.7) EXPECT_LT(SoftplusPenalty(a, 0), SoftplusPenalty(a + 0.1, 0));
}

TEST(GameConfigTest, Validation) {
  GameConfig cfg;
  EXPECT_NO_THROW(cfg.Validate(4));
  cfg.budget_m = 0.0;
  EXPECT_THROW(cfg.Validate(4), ContractError);
  cfg = {};
  cfg.stop_delta = 0.5;
  EXPECT_THROW(cfg.Validate(4), ContractError);
  cfg = {};
  cfg.gen_cfg.batch_size = 32;  // below 16 per class
  EXPECT_THROW(cfg.Validate(4), ContractError);
  EXPECT_EQ(ParseLossMode("cross_entropy_unsound"), GeneratorLossMode::kCrossEntropyUnsound);
  EXPECT_THROW(ParseLossMode("ce"), ContractError);
}

TEST(StratifiedOrderTest, WindowsAreBalanced) {
  std::vector<int> labels;
  for (int i = 0; i < 400; ++i) labels.push_back((i * 7) % 4);
  Rng rng(1);
  const auto order = StratifiedOrder(labels, 4, rng);
  ASSERT_EQ(order.size(), labels.size());
  std::vector<bool> seen(labels.size(), false);
  for (auto i : order) seen[i] = true;
  EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }));
  for (std::size_t start = 0; start + 64 <= order.size(); start += 64) {
    std::vector<int> count(4, 0);
    for (std::size_t i = start; i < start + 64; ++i) count[labels[order[i]]]++;
    for (int c : count) EXPECT_EQ(c, 16);
  }
}

class ClassifierTest : public ::testing::Test {
 protected:
  DatasetSplits data_ = SmallSynthetic(3);
};

TEST_F(ClassifierTest, SeparableClustersReachFullAccuracy) {
  Rng rng(4);
  TrainConfig cfg{64, 60, 1e-3, {}};
  const Mlp clf = TrainClassifier(Mlp::Glorot({2, 60, 100, 51, 4}, Head::kSoftmax, 5),
                                  NormalizedInputs(data_.train), Labels(data_.train), cfg, rng);
  EXPECT_GE(ClassifierAccuracy(clf, NormalizedInputs(data_.train), Labels(data_.train)), 0.99);
  EXPECT_GE(ClassifierAccuracy(clf, NormalizedInputs(data_.test), Labels(data_.test)), 0.99);
}

TEST_F(ClassifierTest, ShuffledLabelsGiveChanceAccuracy) {
  SyntheticSpec spec;
  spec.seed = 8;
  const DatasetSplits big = GenSynthetic(spec);
  std::vector<int> labels = Labels(big.train), val_labels = Labels(big.val);
  Rng shuffle(9);
  shuffle.Shuffle(labels.begin(), labels.end());
  shuffle.Shuffle(val_labels.begin(), val_labels.end());
  Rng rng(10);
  const Mlp clf = TrainClassifier(Mlp::Glorot({2, 60, 100, 51, 4}, Head::kSoftmax, 11),
                                  NormalizedInputs(big.train), labels, TrainConfig{}, rng);
  EXPECT_NEAR(ClassifierAccuracy(clf, NormalizedInputs(big.val), val_labels), 0.25, 0.05);
}

TEST_F(ClassifierTest, FixedSeedIsReproducible) {
  double acc[2];
  Eigen::VectorXd params[2];
  for (int run = 0; run < 2; ++run) {
    Rng rng(12);
    const Mlp clf = TrainClassifier(Mlp::Glorot({2, 8, 4}, Head::kSoftmax, 13),
                                    NormalizedInputs(data_.train), Labels(data_.train),
                                    TrainConfig{32, 3, 1e-3, {}}, rng);
    acc[run] = ClassifierAccuracy(clf, NormalizedInputs(data_.val), Labels(data_.val));
    params[run] = clf.FlatParameters();
  }
  EXPECT_EQ(acc[0], acc[1]);
  EXPECT_EQ(params[0], params[1]);
}

// Generator whose output equals the input location.
Generator IdentityGenerator(double side) {
  Mlp net = Mlp::Glorot({3, 2}, Head::kLinear, 0);
  net.layers()[0].weights.setZero();
  net.layers()[0].weights(0, 0) = 1.0;
  net.layers()[0].weights(1, 1) = 1.0;
  return Generator(net, side);
}

GeneratorBatch BatchOf(const Dataset& d) {
  GeneratorBatch b;
  Rng rng(14);
  for (const auto& s : d.samples) {
    b.w.push_back(s.location);
    b.labels.push_back(s.class_id);
    b.seeds.push_back(rng.Uniform());
  }
  return b;
}

TEST_F(ClassifierTest, IdentityGeneratorWithPerfectClassifierHasMaximalInformation) {
  Rng rng(15);
  const Mlp clf = TrainClassifier(Mlp::Glorot({2, 60, 100, 51, 4}, Head::kSoftmax, 16),
                                  NormalizedInputs(data_.train), Labels(data_.train),
                                  TrainConfig{64, 100, 1e-3, {}}, rng);
  GameConfig cfg;
  cfg.alpha = 0.0;
  cfg.beta = 1.0;
  const Generator gen = IdentityGenerator(data_.train.region.side_m);
  const GeneratorLossResult r = GeneratorLoss(gen, clf, BatchOf(data_.train), cfg, 4);
  EXPECT_NEAR(r.loss, std::log(4.0), 0.05);
  EXPECT_NEAR(r.distortion_m, 0.0, 1e-9);
}

TEST_F(ClassifierTest, CollapsingGeneratorCarriesNoInformation) {
  Mlp net = Mlp::Glorot({3, 4, 2}, Head::kLinear, 1);
  net.SetFlatParameters(Eigen::VectorXd::Zero(net.ParameterCount()));
  const Generator gen(net, data_.train.region.side_m);
  GameConfig cfg;
  cfg.alpha = 0.0;
  const Mlp clf = Mlp::Glorot({2, 8, 4}, Head::kSoftmax, 2);
  const GeneratorLossResult r = GeneratorLoss(gen, clf, BatchOf(data_.train), cfg, 4);
  EXPECT_NEAR(r.mutual_info, 0.0, 1e-12);
  EXPECT_NEAR(r.loss, 0.0, 1e-12);
}

TEST_F(ClassifierTest, RelabelingTheClassifierHeadLeavesInformationUnchanged) {
  const Mlp clf = Mlp::Glorot({2, 8, 4}, Head::kSoftmax, 3);
  Mlp permuted = clf;
  const std::vector<int> perm{2, 0, 3, 1};
  auto& last = permuted.layers().back();
  const auto orig = clf.layers().back();
  for (int j = 0; j < 4; ++j) {
    last.weights.col(perm[j]) = orig.weights.col(j);
    last.bias(perm[j]) = orig.bias(j);
  }
  Rng rng(4);
  const std::vector<Location> anchors{{0, 0}};
  const Generator gen = PretrainLaplaceGenerator(
      anchors, PlanarLaplace(0.01), data_.train.region.side_m, {8, 8}, 5, 6);
  GameConfig cfg;
  cfg.alpha = 0.0;
  const GeneratorBatch b = BatchOf(data_.train);
  EXPECT_NEAR(GeneratorLoss(gen, clf, b, cfg, 4).mutual_info,
              GeneratorLoss(gen, permuted, b, cfg, 4).mutual_info, 1e-12);
}

TEST(PretrainTest, GeneratorImitatesLaplaceDistortion) {
  const DatasetSplits data = SmallSynthetic(1);
  std::vector<Location> anchors;
  for (const auto& s : data.train.samples) anchors.push_back(s.location);
  const PlanarLaplace lap(std::numbers::ln2 / 100.0);
  const Generator gen =
      PretrainLaplaceGenerator(anchors, lap, data.train.region.side_m, {100, 100, 100}, 2000, 7);
  Rng rng(8);
  std::vector<Location> z(anchors.size() * 20), w;
  for (int r = 0; r < 20; ++r) w.insert(w.end(), anchors.begin(), anchors.end());
  gen.SampleBatch(w, rng, z);
  EXPECT_NEAR(EmpiricalDistortion(w, z) / lap.ExpectedDistortion(), 1.0, 0.15);
}

// Equilibrium check on a tabular channel: a classifier trained to CE
// optimality on one-hot z recovers the posterior, so its argmax error is
// the Bayes error of the channel.
TEST(EquilibriumTest, TrainedClassifierErrorEqualsBayesError) {
  Rng rng(20);
  Eigen::MatrixXd joint = testing::RandomJoint(3, 5, rng);  // x by z
  joint = joint.array().pow(2.0);
  joint /= joint.sum();
  const double bayes = BayesError(joint);
  // Sample (x, z) pairs from the joint.
  const int n = 20000;
  Eigen::MatrixXd inputs = Eigen::MatrixXd::Zero(n, 5);
  std::vector<int> labels(n);
  const Eigen::Map<const Eigen::VectorXd> flat(joint.data(), joint.size());
  for (int i = 0; i < n; ++i) {
    double u = rng.Uniform(), acc = 0.0;
    Eigen::Index k = 0;
    for (; k < flat.size() - 1; ++k)
      if ((acc += flat(k)) > u) break;
    labels[i] = static_cast<int>(k % 3);
    inputs(i, k / 3) = 1.0;
  }
  Rng train_rng(21);
  const Mlp clf = TrainClassifier(Mlp::Glorot({5, 3}, Head::kSoftmax, 22), inputs, labels,
                                  TrainConfig{256, 200, 1e-2, {}}, train_rng);
  const double err = 1.0 - ClassifierAccuracy(clf, inputs, labels);
  EXPECT_NEAR(err, bayes, 0.01);
}

GameConfig TinyGame(std::uint64_t seed) {
  GameConfig cfg;
  cfg.gen_cfg = {64, 5, 1e-3, {}};
  cfg.clf_cfg = {128, 5, 1e-3, {}};
  cfg.gen_hidden = {10, 10};
  cfg.clf_hidden = {10, 10};
  cfg.pretrain_steps = 50;
  cfg.max_iterations = 3;
  cfg.seeds_per_location = 2;
  cfg.seed = seed;
  return cfg;
}

TEST(RunGameTest, FixedSeedGivesIdenticalRuns) {
  const DatasetSplits data = SmallSynthetic(2);
  const GameResult a = RunGame(data, TinyGame(5));
  const GameResult b = RunGame(data, TinyGame(5));
  ASSERT_EQ(a.logs.size(), b.logs.size());
  for (std::size_t i = 0; i < a.logs.size(); ++i) {
    EXPECT_EQ(a.logs[i].acc_val, b.logs[i].acc_val);
    EXPECT_EQ(a.logs[i].mi_nats, b.logs[i].mi_nats);
    EXPECT_EQ(a.logs[i].distortion_m, b.logs[i].distortion_m);
    EXPECT_EQ(a.logs[i].iteration, static_cast<int>(i) + 1);
  }
  EXPECT_EQ(a.generator.net().FlatParameters(), b.generator.net().FlatParameters());
  const GameResult c = RunGame(data, TinyGame(6));
  EXPECT_NE(a.generator.net().FlatParameters(), c.generator.net().FlatParameters());
}

TEST(RunGameTest, HookSeesEveryEvaluatedGenerator) {
  const DatasetSplits data = SmallSynthetic(2);
  std::vector<int> seen;
  const GameResult r = RunGame(data, TinyGame(5), [&](const IterationLog& l, const Generator& g) {
    seen.push_back(l.iteration);
    EXPECT_EQ(g.net().iteration(), l.iteration - 1);
  });
  EXPECT_EQ(seen, (std::vector<int>{1, 2, 3}));
  EXPECT_FALSE(r.converged);
}

TEST(RunGameTest, UtilityOnlyObjectiveStaysNearIdentity) {
  const DatasetSplits data = SmallSynthetic(4);
  GameConfig cfg = TinyGame(7);
  cfg.alpha = 1.0;
  cfg.beta = 0.0;
  cfg.budget_m = 10.0;
  cfg.gen_cfg = {64, 400, 1e-3, {}};
  cfg.clf_cfg = {128, 40, 1e-3, {}};
  cfg.clf_hidden = {60, 100, 51};
  cfg.max_iterations = 3;
  const GameResult r = RunGame(data, cfg);
  const IterationLog& last = r.logs.back();
  EXPECT_LT(last.distortion_m, 20.0);
  EXPECT_GE(last.acc_test, 0.95);
}

TEST(RunGameTest, CrossEntropyModeNeverStopsEarly) {
  const DatasetSplits data = SmallSynthetic(2);
  GameConfig cfg = TinyGame(8);
  cfg.generator_loss_mode = GeneratorLossMode::kCrossEntropyUnsound;
  cfg.stop_delta = 0.49;  // would stop at once in MI mode
  cfg.stop_patience = 1;
  const GameResult r = RunGame(data, cfg);
  EXPECT_EQ(r.logs.size(), 3u);
  EXPECT_FALSE(r.converged);
}

TEST(RunGameTest, IterationsCsvHeader) {
  const auto dir = testing::TempDir("iterations_csv");
  std::vector<IterationLog> logs(2);
  logs[0].iteration = 1;
  logs[1].iteration = 2;
  logs[1].acc_val = 0.25;
  WriteIterationsCsv(logs, dir / "iterations.csv", "prov");
  const std::string text = testing::ReadFile(dir / "iterations.csv");
  EXPECT_EQ(text.rfind("# prov\niter,acc_train,acc_val,acc_test,mi_nats,distortion_m,seconds\n1,", 0),
            0u);
}

}  // namespace
}  // namespace locpriv
