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

#ifndef LOCPRIV_ADVERSARIAL_H_
#define LOCPRIV_ADVERSARIAL_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "locpriv/dataset.h"
#include "locpriv/mechanisms.h"
#include "locpriv/mlp.h"
#include "locpriv/rng.h"

namespace locpriv {

// ln(1 + exp(measured - budget)), evaluated without overflow.
double SoftplusPenalty(double measured, double budget);
// d/d(measured) of SoftplusPenalty: the logistic sigmoid of the gap.
double SoftplusPenaltyGrad(double measured, double budget);

struct TrainConfig {
  int batch_size = 512;
  int epochs = 20;
  double learning_rate = 1e-3;
  AdamParams adam;

  void Validate() const;
};

enum class GeneratorLossMode { kMutualInfo, kCrossEntropyUnsound };
std::string_view LossModeName(GeneratorLossMode mode);
GeneratorLossMode ParseLossMode(std::string_view name);

struct GameConfig {
  double budget_m = 270.0;
  double alpha = 1.0;
  double beta = 2.0;
  TrainConfig gen_cfg{128, 100, 1e-3, {}};
  TrainConfig clf_cfg{512, 20, 1e-3, {}};
  int max_iterations = 200;
  double stop_delta = 0.02;
  int stop_patience = 3;
  int seeds_per_location = 10;
  GeneratorLossMode generator_loss_mode = GeneratorLossMode::kMutualInfo;
  std::vector<int> gen_hidden{100, 100, 100};
  std::vector<int> clf_hidden{60, 100, 51};
  // G_0 imitates planar Laplace noise with this epsilon (1/m).
  double init_epsilon = 0.006931471805599453;
  int pretrain_steps = 2000;
  std::uint64_t seed = 0;

  void Validate(int num_classes) const;
};

// The generator network viewed as an obfuscation mechanism: input
// (w_x, w_y, s) in normalized coordinates plus a seed s ~ U[0, 1), output the
// normalized reported location.
class Generator final : public Mechanism {
 public:
  Generator(Mlp net, double side_m);

  const Mlp& net() const { return net_; }
  Mlp& net() { return net_; }
  double side_m() const { return side_m_; }

  Eigen::MatrixXd Inputs(std::span<const Location> w,
                         std::span<const double> seeds) const;
  Location Sample(const Location& w, Rng& rng) const override;
  void SampleBatch(std::span<const Location> in, Rng& rng,
                   std::span<Location> out) const override;

 private:
  Mlp net_;
  double side_m_;
};

// Fits a fresh generator to reproduce planar Laplace displacements, with the
// seed driving both the radial quantile and a spiral angle.
Generator PretrainLaplaceGenerator(std::span<const Location> anchors,
                                   const PlanarLaplace& laplace, double side_m,
                                   const std::vector<int>& hidden, int steps,
                                   std::uint64_t seed);

// One generator batch: true locations, their labels and per-sample seeds.
struct GeneratorBatch {
  std::vector<Location> w;
  std::vector<int> labels;
  std::vector<double> seeds;
};

struct GeneratorLossResult {
  double loss = 0.0;
  double mutual_info = 0.0;     // batch estimate, nats
  double cross_entropy = 0.0;   // mean -log Q(i, x_i), nats
  double distortion_m = 0.0;    // batch mean displacement
  Mlp::Gradients gen_grads;     // only when requested
};

// alpha * softplus(mean displacement, L) + beta * I(X;Y) (or - beta * CE in
// the unsound mode). Gradients flow through the frozen classifier.
GeneratorLossResult GeneratorLoss(const Generator& gen, const Mlp& clf,
                                  const GeneratorBatch& batch,
                                  const GameConfig& cfg, int num_classes,
                                  bool want_grads = true);

// Trains `clf0` with softmax cross entropy on (inputs, labels); inputs are
// normalized locations.
Mlp TrainClassifier(Mlp clf0, const Eigen::MatrixXd& inputs,
                    std::span<const int> labels, const TrainConfig& cfg, Rng& rng);

double ClassifierAccuracy(const Mlp& clf, const Eigen::MatrixXd& inputs,
                          std::span<const int> labels);
std::vector<int> PredictLabels(const Mlp& clf, const Eigen::MatrixXd& inputs);

// Stratified order: per-class shuffles interleaved round-robin so every
// consecutive window of the result is class balanced.
std::vector<std::size_t> StratifiedOrder(std::span<const int> labels,
                                         int num_classes, Rng& rng);

struct IterationLog {
  int iteration = 0;
  double acc_train = 0.0;
  double acc_val = 0.0;
  double acc_test = 0.0;
  double mi_nats = 0.0;
  double distortion_m = 0.0;      // test split
  double val_distortion_m = 0.0;  // used for stopping and selection
  double seconds = 0.0;
};

struct GameResult {
  // On convergence the generator that met the stopping rule; otherwise the
  // best one seen (lowest val accuracy within 1.05 L, ties by lower MI).
  Generator generator;
  std::vector<IterationLog> logs;
  bool converged = false;
  int selected_iteration = 0;  // iteration whose classifier evaluated it
};

// Called after each evaluation with the log entry and the generator that
// was evaluated (the one entering the iteration).
using IterationHook = std::function<void(const IterationLog&, const Generator&)>;

// Alternating game with classifier reset: each iteration trains a fresh
// classifier on the current generator's output, then trains the generator
// against that frozen classifier.
GameResult RunGame(const DatasetSplits& data, const GameConfig& cfg,
                   const IterationHook& hook = {});

void WriteIterationsCsv(std::span<const IterationLog> logs,
                        const std::filesystem::path& path,
                        std::string_view provenance = {});

}  // namespace locpriv

#endif  // LOCPRIV_ADVERSARIAL_H_
