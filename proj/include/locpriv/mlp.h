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

#ifndef LOCPRIV_MLP_H_
#define LOCPRIV_MLP_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace locpriv {

enum class Head { kLinear, kSoftmax };
std::string_view HeadName(Head head);
Head ParseHead(std::string_view name);

struct DenseLayer {
  Eigen::MatrixXd weights;  // fan_in x fan_out
  Eigen::RowVectorXd bias;  // fan_out
};

// Fully connected ReLU network with a linear or softmax head. Batches are
// row-major: one sample per row.
class Mlp {
 public:
  // Per-layer post-activation values kept for the backward pass;
  // values[0] is the input, values.back() the head output.
  struct Cache {
    std::vector<Eigen::MatrixXd> values;
  };

  struct Gradients {
    std::vector<DenseLayer> layers;
    Eigen::MatrixXd input;  // dL/d(input), filled when requested
  };

  Mlp(std::vector<int> layer_sizes, Head head, std::uint64_t seed);

  // Glorot-uniform weights, zero biases.
  static Mlp Glorot(std::vector<int> layer_sizes, Head head, std::uint64_t seed);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  Head head() const { return head_; }
  std::uint64_t seed() const { return seed_; }
  std::int64_t iteration() const { return iteration_; }
  void set_iteration(std::int64_t it) { iteration_ = it; }
  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  std::size_t ParameterCount() const;

  Eigen::MatrixXd Forward(const Eigen::MatrixXd& input) const;
  Eigen::MatrixXd Forward(const Eigen::MatrixXd& input, Cache* cache) const;

  // Backpropagates dL/d(output). For a softmax head `grad_output` is taken
  // w.r.t. the probabilities unless `grad_is_logits` is set, in which case
  // it is w.r.t. the pre-softmax logits (used by the fused cross-entropy).
  Gradients Backward(const Cache& cache, const Eigen::MatrixXd& grad_output,
                     bool want_input_grad = false, bool want_param_grads = true,
                     bool grad_is_logits = false) const;

  // Parameter vector views for finite-difference checks.
  Eigen::VectorXd FlatParameters() const;
  void SetFlatParameters(const Eigen::VectorXd& flat);
  static Eigen::VectorXd Flatten(const std::vector<DenseLayer>& layers);

  // JSON checkpoint: layer sizes, head, seed, iteration, row-major arrays.
  void Save(const std::filesystem::path& path) const;
  static Mlp Load(const std::filesystem::path& path);

 private:
  std::vector<int> sizes_;
  Head head_;
  std::uint64_t seed_;
  std::int64_t iteration_ = 0;
  std::vector<DenseLayer> layers_;
};

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<DenseLayer> m;
  std::vector<DenseLayer> v;
  std::int64_t step = 0;

  static AdamState For(const Mlp& net);
};

void AdamStep(Mlp& net, const Mlp::Gradients& grads, AdamState& state,
              double learning_rate, const AdamParams& params = {});

// Row-wise softmax with the max subtracted.
Eigen::MatrixXd Softmax(const Eigen::MatrixXd& logits);

// Central-difference check of analytic parameter gradients. Returns the
// largest |analytic - numeric| / max(|analytic|, |numeric|, floor) over all
// parameters.
struct GradCheckResult {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t worst_index = 0;
};
GradCheckResult CheckGradients(const std::function<double(const Mlp&)>& loss,
                               const Mlp& net, const Eigen::VectorXd& analytic,
                               double step = 1e-5, double floor = 1e-7);

}  // namespace locpriv

#endif  // LOCPRIV_MLP_H_
