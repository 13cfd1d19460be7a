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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <string>
#include <utility>

#include "locpriv/error.h"
#include "locpriv/info_theory.h"

namespace locpriv {
namespace {

struct ObfuscatedSet {
  Eigen::MatrixXd z;  // normalized
  std::vector<int> labels;
  double distortion_m = 0.0;
};

ObfuscatedSet Obfuscate(const Generator& gen, const Dataset& data, int reps,
                        Rng& rng) {
  const std::size_t n = data.samples.size() * static_cast<std::size_t>(reps);
  std::vector<Location> w(n);
  std::vector<double> seeds(n);
  ObfuscatedSet out;
  out.labels.resize(n);
  std::size_t k = 0;
  for (int r = 0; r < reps; ++r)
    for (const auto& s : data.samples) {
      w[k] = s.location;
      out.labels[k] = s.class_id;
      seeds[k] = rng.Uniform();
      ++k;
    }
  out.z = gen.net().Forward(gen.Inputs(w, seeds));
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Location z = Location::FromNormalized(out.z(i, 0), out.z(i, 1), gen.side_m());
    total += Distance(w[i], z);
  }
  out.distortion_m = n ? total / static_cast<double>(n) : 0.0;
  return out;
}

std::vector<int> WithHead(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

}  // namespace

double SoftplusPenalty(double measured, double budget) {
  const double gap = measured - budget;
  if (gap > 0.0) return gap + std::log1p(std::exp(-gap));
  return std::log1p(std::exp(gap));
}

double SoftplusPenaltyGrad(double measured, double budget) {
  const double gap = measured - budget;
  if (gap >= 0.0) return 1.0 / (1.0 + std::exp(-gap));
  const double e = std::exp(gap);
  return e / (1.0 + e);
}

void TrainConfig::Validate() const {
  Require(batch_size > 0 && epochs > 0 && learning_rate > 0.0,
          "TrainConfig: batch size, epochs and learning rate must be positive");
}

std::string_view LossModeName(GeneratorLossMode mode) {
  return mode == GeneratorLossMode::kMutualInfo ? "mutual_info"
                                                : "cross_entropy_unsound";
}

GeneratorLossMode ParseLossMode(std::string_view name) {
  if (name == "mutual_info") return GeneratorLossMode::kMutualInfo;
  if (name == "cross_entropy_unsound") return GeneratorLossMode::kCrossEntropyUnsound;
  throw ContractError("unknown generator_loss_mode '" + std::string(name) + "'");
}

void GameConfig::Validate(int num_classes) const {
  Require(budget_m > 0.0, "GameConfig: budget L must be positive");
  Require(alpha >= 0.0 && beta >= 0.0, "GameConfig: alpha and beta must be >= 0");
  Require(stop_delta > 0.0 && stop_delta < 0.5, "GameConfig: stop_delta not in (0, 0.5)");
  Require(max_iterations > 0 && stop_patience > 0 && seeds_per_location > 0,
          "GameConfig: iteration counts must be positive");
  Require(init_epsilon > 0.0, "GameConfig: init_epsilon must be positive");
  gen_cfg.Validate();
  clf_cfg.Validate();
  Require(gen_cfg.batch_size >= 16 * num_classes,
          "GameConfig: generator batch must hold at least 16 samples per class");
}

Generator::Generator(Mlp net, double side_m) : net_(std::move(net)), side_m_(side_m) {
  Require(net_.input_size() == 3 && net_.output_size() == 2,
          "Generator: network must map (w_x, w_y, s) to a 2-D location");
  Require(net_.head() == Head::kLinear, "Generator: head must be linear");
  Require(side_m_ > 0.0, "Generator: region side must be positive");
}

Eigen::MatrixXd Generator::Inputs(std::span<const Location> w,
                                  std::span<const double> seeds) const {
  Require(w.size() == seeds.size(), "Generator::Inputs: size mismatch");
  Eigen::MatrixXd in(w.size(), 3);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const Eigen::Vector2d n = w[i].Normalized(side_m_);
    in(i, 0) = n.x();
    in(i, 1) = n.y();
    in(i, 2) = seeds[i];
  }
  return in;
}

Location Generator::Sample(const Location& w, Rng& rng) const {
  Location out;
  SampleBatch(std::span<const Location>(&w, 1), rng, std::span<Location>(&out, 1));
  return out;
}

void Generator::SampleBatch(std::span<const Location> in, Rng& rng,
                            std::span<Location> out) const {
  Require(in.size() == out.size(), "Generator::SampleBatch: size mismatch");
  std::vector<double> seeds(in.size());
  for (auto& s : seeds) s = rng.Uniform();
  const Eigen::MatrixXd z = net_.Forward(Inputs(in, seeds));
  for (std::size_t i = 0; i < in.size(); ++i)
    out[i] = Location::FromNormalized(z(i, 0), z(i, 1), side_m_);
}

Generator PretrainLaplaceGenerator(std::span<const Location> anchors,
                                   const PlanarLaplace& laplace, double side_m,
                                   const std::vector<int>& hidden, int steps,
                                   std::uint64_t seed) {
  Require(!anchors.empty(), "PretrainLaplaceGenerator: no anchors");
  constexpr int kBatch = 256;
  constexpr double kSpiralTurns = 4.0;
  Generator gen(Mlp::Glorot(WithHead(3, hidden, 2), Head::kLinear, seed), side_m);
  Rng rng(DeriveSeed(seed, "pretrain"));
  AdamState adam = AdamState::For(gen.net());
  std::vector<Location> w(kBatch);
  std::vector<double> s(kBatch);
  Eigen::MatrixXd target(kBatch, 2);
  for (int step = 0; step < steps; ++step) {
    for (int i = 0; i < kBatch; ++i) {
      w[i] = anchors[rng.Index(anchors.size())];
      s[i] = rng.Uniform();
      const double r = laplace.InverseRadialCdf(std::min(s[i], 1.0 - 1e-9));
      const double theta = 2.0 * std::numbers::pi * kSpiralTurns * s[i];
      const Location z{w[i].x_m + r * std::cos(theta), w[i].y_m + r * std::sin(theta)};
      target.row(i) = z.Normalized(side_m).transpose();
    }
    Mlp::Cache cache;
    const Eigen::MatrixXd out = gen.net().Forward(gen.Inputs(w, s), &cache);
    const Eigen::MatrixXd grad = 2.0 * (out - target) / static_cast<double>(kBatch);
    AdamStep(gen.net(), gen.net().Backward(cache, grad), adam, 1e-3);
  }
  return gen;
}

GeneratorLossResult GeneratorLoss(const Generator& gen, const Mlp& clf,
                                  const GeneratorBatch& batch,
                                  const GameConfig& cfg, int num_classes,
                                  bool want_grads) {
  const std::size_t n = batch.w.size();
  Require(n > 0 && batch.labels.size() == n && batch.seeds.size() == n,
          "GeneratorLoss: inconsistent batch");
  Require(clf.output_size() == num_classes && clf.head() == Head::kSoftmax,
          "GeneratorLoss: classifier must be a softmax over the classes");
  const double half_side = 0.5 * gen.side_m();
  const double inv_n = 1.0 / static_cast<double>(n);

  Mlp::Cache gen_cache, clf_cache;
  const Eigen::MatrixXd z = gen.net().Forward(gen.Inputs(batch.w, batch.seeds), &gen_cache);
  const Eigen::MatrixXd q = clf.Forward(z, &clf_cache);

  Eigen::MatrixXd diff(n, 2);
  Eigen::VectorXd norms(n);
  for (std::size_t i = 0; i < n; ++i) {
    diff.row(i) = z.row(i) - batch.w[i].Normalized(gen.side_m()).transpose();
    norms(i) = diff.row(i).norm();
  }

  GeneratorLossResult r;
  r.distortion_m = norms.sum() * inv_n * half_side;
  const BatchMats mats = BatchMats::FromLabels(batch.labels, q);
  Eigen::MatrixXd grad_q;
  r.mutual_info = BatchMutualInfo(mats, want_grads ? &grad_q : nullptr);
  for (std::size_t i = 0; i < n; ++i)
    r.cross_entropy -= std::log(std::max(q(i, batch.labels[i]), kLogFloor)) * inv_n;

  const double penalty = SoftplusPenalty(r.distortion_m, cfg.budget_m);
  if (cfg.generator_loss_mode == GeneratorLossMode::kMutualInfo) {
    r.loss = cfg.alpha * penalty + cfg.beta * r.mutual_info;
  } else {
    r.loss = cfg.alpha * penalty - cfg.beta * r.cross_entropy;
  }
  if (!want_grads) return r;

  if (cfg.generator_loss_mode == GeneratorLossMode::kMutualInfo) {
    grad_q *= cfg.beta;
  } else {
    grad_q = Eigen::MatrixXd::Zero(n, num_classes);
    for (std::size_t i = 0; i < n; ++i) {
      const double qi = q(i, batch.labels[i]);
      if (qi >= kLogFloor) grad_q(i, batch.labels[i]) = cfg.beta * inv_n / qi;
    }
  }
  Eigen::MatrixXd grad_z =
      clf.Backward(clf_cache, grad_q, /*want_input_grad=*/true,
                   /*want_param_grads=*/false)
          .input;
  const double pen_scale =
      cfg.alpha * SoftplusPenaltyGrad(r.distortion_m, cfg.budget_m) * half_side * inv_n;
  for (std::size_t i = 0; i < n; ++i)
    if (norms(i) > 0.0) grad_z.row(i) += pen_scale * diff.row(i) / norms(i);
  r.gen_grads = gen.net().Backward(gen_cache, grad_z);
  return r;
}

std::vector<std::size_t> StratifiedOrder(std::span<const int> labels,
                                         int num_classes, Rng& rng) {
  std::vector<std::vector<std::size_t>> by_class(num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) by_class.at(labels[i]).push_back(i);
  for (auto& c : by_class) rng.Shuffle(c.begin(), c.end());
  std::vector<std::size_t> order;
  order.reserve(labels.size());
  for (std::size_t k = 0; order.size() < labels.size(); ++k)
    for (const auto& c : by_class)
      if (k < c.size()) order.push_back(c[k]);
  return order;
}

Mlp TrainClassifier(Mlp clf, const Eigen::MatrixXd& inputs,
                    std::span<const int> labels, const TrainConfig& cfg, Rng& rng) {
  cfg.Validate();
  const std::size_t n = static_cast<std::size_t>(inputs.rows());
  Require(n == labels.size() && n > 0, "TrainClassifier: inputs/labels mismatch");
  Require(clf.head() == Head::kSoftmax, "TrainClassifier: softmax head required");
  AdamState adam = AdamState::For(clf);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  const std::size_t bs = static_cast<std::size_t>(cfg.batch_size);
  Eigen::MatrixXd xb, grad;
  Mlp::Cache cache;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.Shuffle(order.begin(), order.end());
    for (std::size_t start = 0; start < n; start += bs) {
      const std::size_t m = std::min(bs, n - start);
      xb.resize(m, inputs.cols());
      for (std::size_t i = 0; i < m; ++i) xb.row(i) = inputs.row(order[start + i]);
      grad = clf.Forward(xb, &cache);
      // Fused softmax + cross entropy: dL/dlogits = (Q - T) / m.
      for (std::size_t i = 0; i < m; ++i) grad(i, labels[order[start + i]]) -= 1.0;
      grad /= static_cast<double>(m);
      AdamStep(clf, clf.Backward(cache, grad, false, true, /*grad_is_logits=*/true),
               adam, cfg.learning_rate, cfg.adam);
    }
  }
  return clf;
}

std::vector<int> PredictLabels(const Mlp& clf, const Eigen::MatrixXd& inputs) {
  const Eigen::MatrixXd q = clf.Forward(inputs);
  std::vector<int> out(q.rows());
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < q.cols(); ++c)
      if (q(i, c) > q(i, best)) best = c;  // ties go to the lowest index
    out[i] = static_cast<int>(best);
  }
  return out;
}

double ClassifierAccuracy(const Mlp& clf, const Eigen::MatrixXd& inputs,
                          std::span<const int> labels) {
  const std::vector<int> pred = PredictLabels(clf, inputs);
  Require(pred.size() == labels.size() && !pred.empty(),
          "ClassifierAccuracy: size mismatch");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

GameResult RunGame(const DatasetSplits& data, const GameConfig& cfg,
                   const IterationHook& hook) {
  const int k = data.train.num_classes;
  cfg.Validate(k);
  data.train.Validate();
  const double side = data.train.region.side_m;
  using Clock = std::chrono::steady_clock;

  std::vector<Location> anchors;
  std::vector<int> train_labels;
  for (const auto& s : data.train.samples) {
    anchors.push_back(s.location);
    train_labels.push_back(s.class_id);
  }
  Generator gen = PretrainLaplaceGenerator(anchors, PlanarLaplace(cfg.init_epsilon), side,
                                           cfg.gen_hidden, cfg.pretrain_steps,
                                           DeriveSeed(cfg.seed, "init-G"));
  const std::vector<int> clf_sizes = WithHead(2, cfg.clf_hidden, k);
  const double chance = 1.0 / static_cast<double>(k);
  const double budget_cap = 1.05 * cfg.budget_m;

  GameResult result{gen, {}, false, 0};
  std::optional<std::pair<double, double>> best;
  int streak = 0;

  for (int it = 1; it <= cfg.max_iterations; ++it) {
    const auto t0 = Clock::now();
    Rng obf_rng(DeriveSeed(cfg.seed, "obfuscate", it));
    const ObfuscatedSet tr = Obfuscate(gen, data.train, cfg.seeds_per_location, obf_rng);
    const ObfuscatedSet va = Obfuscate(gen, data.val, cfg.seeds_per_location, obf_rng);
    const ObfuscatedSet te = Obfuscate(gen, data.test, cfg.seeds_per_location, obf_rng);

    Rng clf_rng(DeriveSeed(cfg.seed, "train-C", it));
    const Mlp clf = TrainClassifier(
        Mlp::Glorot(clf_sizes, Head::kSoftmax, DeriveSeed(cfg.seed, "init-C", it)),
        tr.z, tr.labels, cfg.clf_cfg, clf_rng);

    IterationLog log;
    log.iteration = it;
    log.acc_train = ClassifierAccuracy(clf, tr.z, tr.labels);
    log.acc_val = ClassifierAccuracy(clf, va.z, va.labels);
    log.acc_test = ClassifierAccuracy(clf, te.z, te.labels);
    log.mi_nats = BatchMutualInfo(BatchMats::FromLabels(va.labels, clf.Forward(va.z)));
    log.distortion_m = te.distortion_m;
    log.val_distortion_m = va.distortion_m;

    // Best so far: lowest val accuracy within budget, then lowest val MI.
    const bool within_budget = va.distortion_m <= budget_cap;
    if (within_budget && (!best || log.acc_val < best->first ||
                          (log.acc_val == best->first && log.mi_nats <= best->second))) {
      best = {log.acc_val, log.mi_nats};
      result.generator = gen;
      result.selected_iteration = it;
    }
    streak = (within_budget && log.acc_val <= chance + cfg.stop_delta) ? streak + 1 : 0;
    const bool stop = cfg.generator_loss_mode == GeneratorLossMode::kMutualInfo &&
                      streak >= cfg.stop_patience;
    if (stop) {
      result.generator = gen;
      result.selected_iteration = it;
    }
    std::optional<Generator> evaluated;
    if (hook) evaluated = gen;

    if (!stop) {
      Rng gen_rng(DeriveSeed(cfg.seed, "train-G", it));
      AdamState adam = AdamState::For(gen.net());
      const std::size_t bs = static_cast<std::size_t>(cfg.gen_cfg.batch_size);
      const std::size_t min_batch = 16 * static_cast<std::size_t>(k);
      GeneratorBatch batch;
      for (int epoch = 0; epoch < cfg.gen_cfg.epochs; ++epoch) {
        const auto order = StratifiedOrder(train_labels, k, gen_rng);
        for (std::size_t start = 0; start < order.size(); start += bs) {
          const std::size_t m = std::min(bs, order.size() - start);
          if (m < min_batch) break;
          batch.w.resize(m);
          batch.labels.resize(m);
          batch.seeds.resize(m);
          for (std::size_t i = 0; i < m; ++i) {
            batch.w[i] = anchors[order[start + i]];
            batch.labels[i] = train_labels[order[start + i]];
            batch.seeds[i] = gen_rng.Uniform();
          }
          const GeneratorLossResult r = GeneratorLoss(gen, clf, batch, cfg, k);
          AdamStep(gen.net(), r.gen_grads, adam, cfg.gen_cfg.learning_rate,
                   cfg.gen_cfg.adam);
        }
      }
      gen.net().set_iteration(it);
    }
    log.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    result.logs.push_back(log);
    if (hook) hook(log, *evaluated);
    if (stop) {
      result.converged = true;
      break;
    }
  }
  return result;
}

void WriteIterationsCsv(std::span<const IterationLog> logs,
                        const std::filesystem::path& path, std::string_view provenance) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  if (!provenance.empty()) out << "# " << provenance << '\n';
  out << "iter,acc_train,acc_val,acc_test,mi_nats,distortion_m,seconds\n";
  for (const auto& l : logs)
    out << l.iteration << ',' << FormatDouble(l.acc_train) << ','
        << FormatDouble(l.acc_val) << ',' << FormatDouble(l.acc_test) << ','
        << FormatDouble(l.mi_nats) << ',' << FormatDouble(l.distortion_m) << ','
        << FormatDouble(l.seconds) << '\n';
}

}  // namespace locpriv
