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

#include "locpriv/mlp.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "json.hpp"
#include "locpriv/error.h"
#include "locpriv/rng.h"

namespace locpriv {

std::string_view HeadName(Head head) {
  return head == Head::kSoftmax ? "softmax" : "linear";
}

Head ParseHead(std::string_view name) {
  if (name == "softmax") return Head::kSoftmax;
  if (name == "linear") return Head::kLinear;
  throw ContractError("unknown head '" + std::string(name) + "'");
}

Mlp::Mlp(std::vector<int> layer_sizes, Head head, std::uint64_t seed)
    : sizes_(std::move(layer_sizes)), head_(head), seed_(seed) {
  Require(sizes_.size() >= 2, "Mlp: need at least input and output sizes");
  for (int s : sizes_) Require(s > 0, "Mlp: layer sizes must be positive");
  layers_.resize(sizes_.size() - 1);
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    layers_[l].weights = Eigen::MatrixXd::Zero(sizes_[l], sizes_[l + 1]);
    layers_[l].bias = Eigen::RowVectorXd::Zero(sizes_[l + 1]);
  }
}

Mlp Mlp::Glorot(std::vector<int> layer_sizes, Head head, std::uint64_t seed) {
  Mlp net(std::move(layer_sizes), head, seed);
  Rng rng(seed);
  for (auto& layer : net.layers_) {
    const double fan_in = static_cast<double>(layer.weights.rows());
    const double fan_out = static_cast<double>(layer.weights.cols());
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c)
        layer.weights(r, c) = rng.Uniform(-limit, limit);
  }
  return net;
}

std::size_t Mlp::ParameterCount() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
  return n;
}

Eigen::MatrixXd Softmax(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out = logits.colwise() - logits.rowwise().maxCoeff();
  out = out.array().exp();
  out.array().colwise() /= out.rowwise().sum().array();
  return out;
}

Eigen::MatrixXd Mlp::Forward(const Eigen::MatrixXd& input) const {
  return Forward(input, nullptr);
}

Eigen::MatrixXd Mlp::Forward(const Eigen::MatrixXd& input, Cache* cache) const {
  Require(input.cols() == sizes_.front(),
          "Mlp::Forward: input width " + std::to_string(input.cols()) +
              " != " + std::to_string(sizes_.front()));
  if (cache != nullptr) {
    cache->values.clear();
    cache->values.reserve(layers_.size() + 1);
    cache->values.push_back(input);
  }
  Eigen::MatrixXd h = input;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Eigen::MatrixXd next = h * layers_[l].weights;
    next.rowwise() += layers_[l].bias;
    const bool last = l + 1 == layers_.size();
    if (!last) {
      next = next.cwiseMax(0.0);
    } else if (head_ == Head::kSoftmax) {
      next = Softmax(next);
    }
    h = std::move(next);
    if (cache != nullptr) cache->values.push_back(h);
  }
  return h;
}

Mlp::Gradients Mlp::Backward(const Cache& cache, const Eigen::MatrixXd& grad_output,
                             bool want_input_grad, bool want_param_grads,
                             bool grad_is_logits) const {
  Require(cache.values.size() == layers_.size() + 1,
          "Mlp::Backward: cache does not belong to this network");
  const Eigen::MatrixXd& out = cache.values.back();
  Require(grad_output.rows() == out.rows() && grad_output.cols() == out.cols(),
          "Mlp::Backward: gradient shape mismatch");
  Gradients grads;
  if (want_param_grads) grads.layers.resize(layers_.size());

  // Gradient w.r.t. the pre-activation of the last layer.
  Eigen::MatrixXd delta;
  if (head_ == Head::kSoftmax && !grad_is_logits) {
    const Eigen::VectorXd dot = (out.array() * grad_output.array()).rowwise().sum();
    delta = out.array() * (grad_output.colwise() - dot).array();
  } else {
    delta = grad_output;
  }
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const Eigen::MatrixXd& in = cache.values[l];
    if (want_param_grads) {
      grads.layers[l].weights = in.transpose() * delta;
      grads.layers[l].bias = delta.colwise().sum();
    }
    if (l == 0 && !want_input_grad) break;
    Eigen::MatrixXd back = delta * layers_[l].weights.transpose();
    if (l > 0) {
      // ReLU derivative from the stored post-activation.
      back = (in.array() > 0.0).select(back, 0.0);
      delta = std::move(back);
    } else {
      grads.input = std::move(back);
    }
  }
  return grads;
}

Eigen::VectorXd Mlp::Flatten(const std::vector<DenseLayer>& layers) {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.bias.size();
  Eigen::VectorXd flat(n);
  std::size_t k = 0;
  for (const auto& l : layers) {
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) flat(k++) = l.weights(r, c);
    for (Eigen::Index c = 0; c < l.bias.size(); ++c) flat(k++) = l.bias(c);
  }
  return flat;
}

Eigen::VectorXd Mlp::FlatParameters() const { return Flatten(layers_); }

void Mlp::SetFlatParameters(const Eigen::VectorXd& flat) {
  Require(static_cast<std::size_t>(flat.size()) == ParameterCount(),
          "Mlp::SetFlatParameters: size mismatch");
  std::size_t k = 0;
  for (auto& l : layers_) {
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) l.weights(r, c) = flat(k++);
    for (Eigen::Index c = 0; c < l.bias.size(); ++c) l.bias(c) = flat(k++);
  }
}

void Mlp::Save(const std::filesystem::path& path) const {
  nlohmann::ordered_json j;
  j["layer_sizes"] = sizes_;
  j["head"] = std::string(HeadName(head_));
  j["seed"] = seed_;
  j["iteration"] = iteration_;
  j["layers"] = nlohmann::ordered_json::array();
  for (const auto& l : layers_) {
    std::vector<double> w;
    w.reserve(l.weights.size());
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) w.push_back(l.weights(r, c));
    std::vector<double> b(l.bias.data(), l.bias.data() + l.bias.size());
    j["layers"].push_back({{"weights", w}, {"bias", b}});
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  out << j.dump(1) << '\n';
}

Mlp Mlp::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    Mlp net(j.at("layer_sizes").get<std::vector<int>>(),
            ParseHead(j.at("head").get<std::string>()),
            j.at("seed").get<std::uint64_t>());
    net.iteration_ = j.value("iteration", std::int64_t{0});
    const auto& layers = j.at("layers");
    if (layers.size() != net.layers_.size())
      throw DataError("checkpoint layer count mismatch in " + path.string());
    for (std::size_t l = 0; l < net.layers_.size(); ++l) {
      const auto w = layers[l].at("weights").get<std::vector<double>>();
      const auto b = layers[l].at("bias").get<std::vector<double>>();
      auto& dst = net.layers_[l];
      if (w.size() != static_cast<std::size_t>(dst.weights.size()) ||
          b.size() != static_cast<std::size_t>(dst.bias.size()))
        throw DataError("checkpoint array size mismatch in " + path.string());
      std::size_t k = 0;
      for (Eigen::Index r = 0; r < dst.weights.rows(); ++r)
        for (Eigen::Index c = 0; c < dst.weights.cols(); ++c) dst.weights(r, c) = w[k++];
      for (std::size_t c = 0; c < b.size(); ++c) dst.bias(c) = b[c];
    }
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad checkpoint " + path.string() + ": " + e.what());
  }
}

AdamState AdamState::For(const Mlp& net) {
  AdamState s;
  for (const auto& l : net.layers()) {
    DenseLayer zero{Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()),
                    Eigen::RowVectorXd::Zero(l.bias.size())};
    s.m.push_back(zero);
    s.v.push_back(std::move(zero));
  }
  return s;
}

void AdamStep(Mlp& net, const Mlp::Gradients& grads, AdamState& state,
              double learning_rate, const AdamParams& p) {
  auto& layers = net.layers();
  Require(grads.layers.size() == layers.size() && state.m.size() == layers.size(),
          "AdamStep: state or gradients do not match the network");
  ++state.step;
  const double c1 = 1.0 - std::pow(p.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(p.beta2, static_cast<double>(state.step));
  auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
    m = p.beta1 * m + (1.0 - p.beta1) * g;
    v = p.beta2 * v + (1.0 - p.beta2) * g.cwiseProduct(g);
    param.array() -= learning_rate * (m.array() / c1) /
                     ((v.array() / c2).sqrt() + p.epsilon);
  };
  for (std::size_t l = 0; l < layers.size(); ++l) {
    update(layers[l].weights, grads.layers[l].weights, state.m[l].weights,
           state.v[l].weights);
    update(layers[l].bias, grads.layers[l].bias, state.m[l].bias, state.v[l].bias);
  }
}

GradCheckResult CheckGradients(const std::function<double(const Mlp&)>& loss,
                               const Mlp& net, const Eigen::VectorXd& analytic,
                               double step, double floor) {
  Require(static_cast<std::size_t>(analytic.size()) == net.ParameterCount(),
          "CheckGradients: analytic gradient size mismatch");
  Mlp probe = net;
  const Eigen::VectorXd base = net.FlatParameters();
  GradCheckResult result;
  Eigen::VectorXd theta = base;
  for (Eigen::Index i = 0; i < base.size(); ++i) {
    theta(i) = base(i) + step;
    probe.SetFlatParameters(theta);
    const double up = loss(probe);
    theta(i) = base(i) - step;
    probe.SetFlatParameters(theta);
    const double down = loss(probe);
    theta(i) = base(i);
    const double numeric = (up - down) / (2.0 * step);
    const double abs_err = std::abs(numeric - analytic(i));
    const double rel =
        abs_err / std::max(std::max(std::abs(numeric), std::abs(analytic(i))), floor);
    result.max_abs_error = std::max(result.max_abs_error, abs_err);
    if (rel > result.max_rel_error) {
      result.max_rel_error = rel;
      result.worst_index = static_cast<std::size_t>(i);
    }
  }
  return result;
}

}  // namespace locpriv
