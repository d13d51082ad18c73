/*
 * Copyright 2026 The maxwent authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef MAXWENT_NETWORK_HPP_
#define MAXWENT_NETWORK_HPP_

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "maxwent/common.hpp"
#include "maxwent/matrix.hpp"

namespace maxwent {

enum class Activation { ReLU, LeakyReLU };

enum class Head {
  LinearRegression,     // identity output, mean squared error
  GaussianRegression,   // (mu, sigma) output, Gaussian negative log likelihood
  BinaryClassification, // sigmoid probability, binary cross entropy
  MultiClass            // softmax over `classes`, categorical cross entropy
};

inline constexpr double kLeakySlope = 0.01;
inline constexpr double kSigmaFloor = 1e-6;
inline constexpr double kProbClip = 1e-12;

/// Architecture of a fully-connected network.
struct NetworkSpec {
  std::size_t input_dim = 1;
  std::vector<std::size_t> hidden = {100, 100, 100};
  Activation activation = Activation::ReLU;
  Head head = Head::GaussianRegression;
  std::size_t classes = 2;  // MultiClass only
  bool use_bias = true;

  std::size_t output_dim() const {
    switch (head) {
      case Head::LinearRegression: return 1;
      case Head::GaussianRegression: return 2;
      case Head::BinaryClassification: return 1;
      case Head::MultiClass: return classes;
    }
    return 1;
  }

  void validate() const {
    if (input_dim == 0) throw ContractViolation("NetworkSpec: input_dim must be >= 1");
    for (std::size_t w : hidden)
      if (w == 0) throw ContractViolation("NetworkSpec: hidden widths must be >= 1");
    if (head == Head::MultiClass && classes < 2)
      throw ContractViolation("NetworkSpec: MultiClass needs >= 2 classes");
  }
};

/// Bijection between the flat weight vector and per-layer matrices.
///
/// Weight matrix l (feeding layer l's representation into layer l+1) is laid
/// out column-by-column: flat[weight_offset + j*in + k] is the weight from
/// in-neuron k to out-neuron j, so the weights in front of one output neuron
/// are contiguous. Bias segments follow their weight block.
class WeightLayout {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  struct LayerShape {
    std::size_t in = 0;
    std::size_t out = 0;
    std::size_t weight_offset = 0;
    std::size_t bias_offset = npos;  // npos when use_bias is false
  };

  struct Coord {
    std::size_t layer = 0;
    bool is_bias = false;
    std::size_t in = 0;  // unused for bias entries
    std::size_t out = 0;
  };

  WeightLayout() = default;

  static WeightLayout from_spec(const NetworkSpec& spec) {
    spec.validate();
    WeightLayout layout;
    std::size_t prev = spec.input_dim;
    std::size_t offset = 0;
    std::vector<std::size_t> widths = spec.hidden;
    widths.push_back(spec.output_dim());
    for (std::size_t w : widths) {
      LayerShape shape;
      shape.in = prev;
      shape.out = w;
      shape.weight_offset = offset;
      offset += prev * w;
      if (spec.use_bias) {
        shape.bias_offset = offset;
        offset += w;
      }
      layout.layers_.push_back(shape);
      prev = w;
    }
    layout.total_ = offset;
    return layout;
  }

  std::size_t total_dim() const { return total_; }
  std::size_t layer_count() const { return layers_.size(); }
  const std::vector<LayerShape>& layers() const { return layers_; }
  const LayerShape& layer(std::size_t l) const { return layers_[l]; }

  std::size_t weight_index(std::size_t l, std::size_t in_k, std::size_t out_j) const {
    const LayerShape& s = layers_[l];
    return s.weight_offset + out_j * s.in + in_k;
  }

  std::size_t bias_index(std::size_t l, std::size_t out_j) const {
    const LayerShape& s = layers_[l];
    if (s.bias_offset == npos) throw ContractViolation("WeightLayout: layer has no bias");
    return s.bias_offset + out_j;
  }

  Coord decode(std::size_t flat) const {
    if (flat >= total_) throw ContractViolation("WeightLayout: flat index out of range");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const LayerShape& s = layers_[l];
      const std::size_t wend = s.weight_offset + s.in * s.out;
      if (flat >= s.weight_offset && flat < wend) {
        const std::size_t rel = flat - s.weight_offset;
        return {l, false, rel % s.in, rel / s.in};
      }
      if (s.bias_offset != npos && flat >= s.bias_offset && flat < s.bias_offset + s.out)
        return {l, true, 0, flat - s.bias_offset};
    }
    throw ContractViolation("WeightLayout: flat index not covered");
  }

 private:
  std::vector<LayerShape> layers_;
  std::size_t total_ = 0;
};

/// A mini-batch: inputs plus targets (reals for regression, labels in
/// {0..K-1} stored as doubles for classification).
struct Batch {
  Matrix X;
  std::vector<double> y;

  void validate(const NetworkSpec& spec) const {
    if (X.rows() != y.size()) throw ContractViolation("Batch: row counts differ");
    if (X.cols() != spec.input_dim) throw ContractViolation("Batch: feature count mismatch");
    if (spec.head == Head::BinaryClassification || spec.head == Head::MultiClass) {
      const double k = spec.head == Head::BinaryClassification ? 2.0
                                                               : static_cast<double>(spec.classes);
      for (double label : y)
        if (label < 0.0 || label >= k || label != std::floor(label))
          throw ContractViolation("Batch: classification label out of range");
    }
  }
};

struct ForwardResult {
  Matrix outputs;               // head activations, n x output_dim
  std::vector<Matrix> hidden;   // hidden[l] is the input to weight matrix l; hidden[0] = X
};

namespace detail {

inline double activate(Activation act, double x) {
  if (act == Activation::ReLU) return x > 0.0 ? x : 0.0;
  return x > 0.0 ? x : kLeakySlope * x;
}

// Derivative recovered from the activation value; sign(act(x)) == sign(x)
// for both supported activations and the subgradient at 0 is defined as 0
// (ReLU) / kLeakySlope (LeakyReLU applied to negative inputs).
inline double activate_grad_from_value(Activation act, double value) {
  if (act == Activation::ReLU) return value > 0.0 ? 1.0 : 0.0;
  return value > 0.0 ? 1.0 : kLeakySlope;
}

inline void check_finite(std::span<const double> v, const char* what) {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!std::isfinite(v[i]))
      throw NumericalError(std::string("forward: non-finite ") + what + " at index " +
                           std::to_string(i));
}

// Affine map through weight layer l: out = in * W + b, without activation.
inline Matrix affine(const Matrix& in, std::span<const double> w,
                     const WeightLayout::LayerShape& s) {
  Matrix out(in.rows(), s.out);
  for (std::size_t i = 0; i < in.rows(); ++i) {
    const double* xi = in.row(i);
    double* oi = out.row(i);
    for (std::size_t j = 0; j < s.out; ++j) {
      const double* wj = w.data() + s.weight_offset + j * s.in;
      double acc = 0.0;
      for (std::size_t k = 0; k < s.in; ++k) acc += xi[k] * wj[k];
      if (s.bias_offset != WeightLayout::npos) acc += w[s.bias_offset + j];
      oi[j] = acc;
    }
  }
  return out;
}

inline void apply_head(Head head, Matrix& pre) {
  switch (head) {
    case Head::LinearRegression:
      break;
    case Head::GaussianRegression:
      for (std::size_t i = 0; i < pre.rows(); ++i)
        pre(i, 1) = std::max(softplus(pre(i, 1)), kSigmaFloor);
      break;
    case Head::BinaryClassification:
      for (std::size_t i = 0; i < pre.rows(); ++i) pre(i, 0) = sigmoid(pre(i, 0));
      break;
    case Head::MultiClass:
      for (std::size_t i = 0; i < pre.rows(); ++i) {
        double mx = pre(i, 0);
        for (std::size_t j = 1; j < pre.cols(); ++j) mx = std::max(mx, pre(i, j));
        double sum = 0.0;
        for (std::size_t j = 0; j < pre.cols(); ++j) {
          pre(i, j) = std::exp(pre(i, j) - mx);
          sum += pre(i, j);
        }
        for (std::size_t j = 0; j < pre.cols(); ++j) pre(i, j) /= sum;
      }
      break;
  }
}

}  // namespace detail

/// Evaluate the network on a batch of inputs for an explicit flat weight
/// vector. hidden[l] holds the representation fed into weight matrix l.
inline ForwardResult forward(const NetworkSpec& spec, const WeightLayout& layout,
                             std::span<const double> w, const Matrix& x) {
  if (w.size() != layout.total_dim())
    throw ContractViolation("forward: weight vector length " + std::to_string(w.size()) +
                            " != layout dimension " + std::to_string(layout.total_dim()));
  if (x.cols() != spec.input_dim)
    throw ContractViolation("forward: input has wrong feature count");
  detail::check_finite(w, "weight");
  detail::check_finite(std::span<const double>(x.data(), x.size()), "input");

  ForwardResult result;
  result.hidden.reserve(layout.layer_count());
  result.hidden.push_back(x);

  Matrix current = x;
  const std::size_t n_layers = layout.layer_count();
  for (std::size_t l = 0; l + 1 < n_layers; ++l) {
    Matrix pre = detail::affine(current, w, layout.layer(l));
    for (std::size_t i = 0; i < pre.rows(); ++i)
      for (std::size_t j = 0; j < pre.cols(); ++j)
        pre(i, j) = detail::activate(spec.activation, pre(i, j));
    current = std::move(pre);
    result.hidden.push_back(current);
  }

  Matrix out = detail::affine(current, w, layout.layer(n_layers - 1));
  detail::apply_head(spec.head, out);
  result.outputs = std::move(out);
  return result;
}

/// Mean negative log likelihood for classification outputs. Accepts a one-
/// column matrix of sigmoid probabilities (binary) or an n x K matrix of
/// softmax probabilities; probabilities are clipped at kProbClip.
inline double loss_classification(const Matrix& probs, std::span<const double> y) {
  if (probs.rows() != y.size()) throw ContractViolation("loss_classification: size mismatch");
  if (probs.rows() == 0) return 0.0;
  double total = 0.0;
  if (probs.cols() == 1) {
    for (std::size_t i = 0; i < probs.rows(); ++i) {
      const double h = std::min(std::max(probs(i, 0), kProbClip), 1.0 - kProbClip);
      total -= y[i] * std::log(h) + (1.0 - y[i]) * std::log(1.0 - h);
    }
  } else {
    for (std::size_t i = 0; i < probs.rows(); ++i) {
      const auto label = static_cast<std::size_t>(std::llround(y[i]));
      const double h = std::max(probs(i, label), kProbClip);
      total -= std::log(h);
    }
  }
  return total / static_cast<double>(probs.rows());
}

/// Mean Gaussian negative log likelihood, (1/n) sum 1/2 (log sigma^2 +
/// (y - mu)^2 / sigma^2); the additive constant (1/2) log 2 pi is omitted.
inline double loss_regression_nll(std::span<const double> mu, std::span<const double> sigma,
                                  std::span<const double> y) {
  if (mu.size() != sigma.size() || mu.size() != y.size())
    throw ContractViolation("loss_regression_nll: size mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (!(sigma[i] > 0.0)) throw ContractViolation("loss_regression_nll: sigma must be > 0");
    const double r = y[i] - mu[i];
    total += 0.5 * (std::log(sigma[i] * sigma[i]) + r * r / (sigma[i] * sigma[i]));
  }
  return mu.empty() ? 0.0 : total / static_cast<double>(mu.size());
}

/// Mean squared error, (1/n) sum (pred - y)^2.
inline double loss_squared(std::span<const double> pred, std::span<const double> y) {
  if (pred.size() != y.size()) throw ContractViolation("loss_squared: size mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double r = pred[i] - y[i];
    total += r * r;
  }
  return pred.empty() ? 0.0 : total / static_cast<double>(pred.size());
}

/// Per-sample losses for the spec's head; their mean is batch_loss.
inline std::vector<double> per_sample_losses(const NetworkSpec& spec, const Matrix& outputs,
                                             std::span<const double> y) {
  std::vector<double> losses(outputs.rows());
  switch (spec.head) {
    case Head::LinearRegression:
      for (std::size_t i = 0; i < outputs.rows(); ++i) {
        const double r = outputs(i, 0) - y[i];
        losses[i] = r * r;
      }
      break;
    case Head::GaussianRegression:
      for (std::size_t i = 0; i < outputs.rows(); ++i) {
        const double s = outputs(i, 1);
        const double r = y[i] - outputs(i, 0);
        losses[i] = 0.5 * (std::log(s * s) + r * r / (s * s));
      }
      break;
    case Head::BinaryClassification:
      for (std::size_t i = 0; i < outputs.rows(); ++i) {
        const double h = std::min(std::max(outputs(i, 0), kProbClip), 1.0 - kProbClip);
        losses[i] = -(y[i] * std::log(h) + (1.0 - y[i]) * std::log(1.0 - h));
      }
      break;
    case Head::MultiClass:
      for (std::size_t i = 0; i < outputs.rows(); ++i) {
        const auto label = static_cast<std::size_t>(std::llround(y[i]));
        losses[i] = -std::log(std::max(outputs(i, label), kProbClip));
      }
      break;
  }
  return losses;
}

inline double batch_loss(const NetworkSpec& spec, const WeightLayout& layout,
                         std::span<const double> w, const Batch& batch) {
  batch.validate(spec);
  const ForwardResult f = forward(spec, layout, w, batch.X);
  const std::vector<double> losses = per_sample_losses(spec, f.outputs, batch.y);
  double total = 0.0;
  for (double v : losses) total += v;
  return losses.empty() ? 0.0 : total / static_cast<double>(losses.size());
}

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

/// Loss and its exact gradient with respect to the flat weight vector.
inline LossGrad loss_and_grad(const NetworkSpec& spec, const WeightLayout& layout,
                              std::span<const double> w, const Batch& batch) {
  batch.validate(spec);
  const ForwardResult f = forward(spec, layout, w, batch.X);
  const std::size_t n = batch.X.rows();
  const double inv_n = n == 0 ? 0.0 : 1.0 / static_cast<double>(n);

  LossGrad result;
  result.grad.assign(layout.total_dim(), 0.0);
  {
    const std::vector<double> losses = per_sample_losses(spec, f.outputs, batch.y);
    double total = 0.0;
    for (double v : losses) total += v;
    result.loss = losses.empty() ? 0.0 : total * inv_n;
  }
  if (n == 0) return result;

  // Gradient of the mean loss with respect to the head pre-activations.
  const Matrix& out = f.outputs;
  Matrix delta(n, out.cols());
  switch (spec.head) {
    case Head::LinearRegression:
      for (std::size_t i = 0; i < n; ++i)
        delta(i, 0) = 2.0 * (out(i, 0) - batch.y[i]) * inv_n;
      break;
    case Head::GaussianRegression:
      for (std::size_t i = 0; i < n; ++i) {
        const double s = out(i, 1);
        const double r = batch.y[i] - out(i, 0);
        delta(i, 0) = -r / (s * s) * inv_n;
        const double dloss_dsigma = 1.0 / s - r * r / (s * s * s);
        // softplus link: d sigma / d pre = sigmoid(pre) = 1 - exp(-sigma),
        // recovered from sigma itself. The floor zeroes the slope when
        // softplus(pre) <= kSigmaFloor (pre below about -13.8).
        const double slope = s <= kSigmaFloor ? 0.0 : -std::expm1(-s);
        delta(i, 1) = dloss_dsigma * slope * inv_n;
      }
      break;
    case Head::BinaryClassification:
      for (std::size_t i = 0; i < n; ++i)
        delta(i, 0) = (out(i, 0) - batch.y[i]) * inv_n;
      break;
    case Head::MultiClass:
      for (std::size_t i = 0; i < n; ++i) {
        const auto label = static_cast<std::size_t>(std::llround(batch.y[i]));
        for (std::size_t j = 0; j < out.cols(); ++j)
          delta(i, j) = (out(i, j) - (j == label ? 1.0 : 0.0)) * inv_n;
      }
      break;
  }

  for (std::size_t li = layout.layer_count(); li-- > 0;) {
    const WeightLayout::LayerShape& s = layout.layer(li);
    const Matrix& input = f.hidden[li];

    for (std::size_t i = 0; i < n; ++i) {
      const double* xi = input.row(i);
      const double* di = delta.row(i);
      for (std::size_t j = 0; j < s.out; ++j) {
        const double d = di[j];
        if (d == 0.0) continue;
        double* gw = result.grad.data() + s.weight_offset + j * s.in;
        for (std::size_t k = 0; k < s.in; ++k) gw[k] += xi[k] * d;
        if (s.bias_offset != WeightLayout::npos) result.grad[s.bias_offset + j] += d;
      }
    }

    if (li == 0) break;
    Matrix prev(n, s.in);
    for (std::size_t i = 0; i < n; ++i) {
      const double* di = delta.row(i);
      double* pi = prev.row(i);
      for (std::size_t j = 0; j < s.out; ++j) {
        const double d = di[j];
        if (d == 0.0) continue;
        const double* wj = w.data() + s.weight_offset + j * s.in;
        for (std::size_t k = 0; k < s.in; ++k) pi[k] += d * wj[k];
      }
      for (std::size_t k = 0; k < s.in; ++k)
        pi[k] *= detail::activate_grad_from_value(spec.activation, input(i, k));
    }
    delta = std::move(prev);
  }
  return result;
}

inline std::vector<double> grad_w(const NetworkSpec& spec, const WeightLayout& layout,
                                  std::span<const double> w, const Batch& batch) {
  return loss_and_grad(spec, layout, w, batch).grad;
}

}  // namespace maxwent

#endif  // MAXWENT_NETWORK_HPP_
