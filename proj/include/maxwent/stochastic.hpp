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

#ifndef MAXWENT_STOCHASTIC_HPP_
#define MAXWENT_STOCHASTIC_HPP_

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "maxwent/common.hpp"
#include "maxwent/matrix.hpp"
#include "maxwent/network.hpp"
#include "maxwent/random.hpp"

namespace maxwent {

enum class ParamKind { Scaling, Svd };

/// Stochastic weight model w = mean + noise, where the noise is the scaled
/// sampling variable phi (.) z, optionally rotated per layer into the
/// eigenbasis of that layer's training activations (Svd kind). phi is kept
/// positive through a softplus of the trained parameter vector `raw`; an
/// empty `raw` denotes a deterministic network (phi identically zero).
/// `clip` is a symmetric clamp applied to phi (.) z before any basis product.
struct WeightDistribution {
  ParamKind kind = ParamKind::Scaling;
  SampleLaw law = SampleLaw::UniformSym;
  WeightLayout layout;
  std::vector<double> mean;
  std::vector<double> raw;
  std::vector<Matrix> bases;  // Svd kind: one orthogonal matrix per weight layer
  double clip = kInf;

  std::size_t dim() const { return mean.size(); }
  bool stochastic() const { return !raw.empty(); }

  double phi(std::size_t k) const { return softplus(raw[k]); }

  std::vector<double> phi_vector() const {
    std::vector<double> out(raw.size());
    for (std::size_t k = 0; k < raw.size(); ++k) out[k] = softplus(raw[k]);
    return out;
  }

  void validate() const {
    if (mean.size() != layout.total_dim())
      throw ContractViolation("WeightDistribution: mean length != layout dimension");
    if (stochastic() && raw.size() != mean.size())
      throw ContractViolation("WeightDistribution: raw length != mean length");
    if (!(clip >= 0.0)) throw ContractViolation("WeightDistribution: clip must be >= 0");
    if (kind == ParamKind::Svd) {
      if (bases.size() != layout.layer_count())
        throw ContractViolation("WeightDistribution: need one basis per weight layer");
      for (std::size_t l = 0; l < bases.size(); ++l) {
        const Matrix& v = bases[l];
        const std::size_t in = layout.layer(l).in;
        if (v.rows() != in || v.cols() != in)
          throw ContractViolation("WeightDistribution: basis " + std::to_string(l) +
                                  " has wrong shape");
        for (std::size_t i = 0; i < in; ++i)
          for (std::size_t j = 0; j < in; ++j) {
            double dot = 0.0;
            for (std::size_t r = 0; r < in; ++r) dot += v(r, i) * v(r, j);
            const double expect = i == j ? 1.0 : 0.0;
            if (std::fabs(dot - expect) > 1e-8)
              throw ContractViolation("WeightDistribution: basis " + std::to_string(l) +
                                      " not orthogonal");
          }
      }
    }
  }
};

inline WeightDistribution make_distribution(const WeightLayout& layout, ParamKind kind,
                                            SampleLaw law, std::vector<double> mean,
                                            double u_init, std::vector<Matrix> bases = {}) {
  WeightDistribution dist;
  dist.kind = kind;
  dist.law = law;
  dist.layout = layout;
  dist.mean = std::move(mean);
  dist.raw.assign(dist.mean.size(), u_init);
  dist.bases = std::move(bases);
  dist.validate();
  return dist;
}

/// Deterministic network wrapped as a distribution (phi absent).
inline WeightDistribution make_deterministic(const WeightLayout& layout,
                                             std::vector<double> mean,
                                             SampleLaw law = SampleLaw::UniformSym) {
  WeightDistribution dist;
  dist.law = law;
  dist.layout = layout;
  dist.mean = std::move(mean);
  if (dist.mean.size() != layout.total_dim())
    throw ContractViolation("make_deterministic: mean length != layout dimension");
  return dist;
}

namespace detail {

inline double clamp_sym(double v, double c) {
  if (c == kInf) return v;
  if (v > c) return c;
  if (v < -c) return -c;
  return v;
}

}  // namespace detail

/// Map a sampling vector z to a concrete flat weight vector.
inline std::vector<double> realize_weights(const WeightDistribution& dist,
                                           std::span<const double> z) {
  if (!dist.stochastic()) return dist.mean;
  if (z.size() != dist.dim())
    throw ContractViolation("realize_weights: z length " + std::to_string(z.size()) +
                            " != distribution dimension " + std::to_string(dist.dim()));

  std::vector<double> w = dist.mean;
  if (dist.kind == ParamKind::Scaling) {
    for (std::size_t k = 0; k < w.size(); ++k)
      w[k] += detail::clamp_sym(softplus(dist.raw[k]) * z[k], dist.clip);
    return w;
  }

  // Svd kind: rotate the clamped scaled noise of each weight-matrix column
  // through that layer's basis; bias segments stay independent.
  std::vector<double> latent;
  for (std::size_t l = 0; l < dist.layout.layer_count(); ++l) {
    const WeightLayout::LayerShape& s = dist.layout.layer(l);
    const Matrix& v = dist.bases[l];
    latent.resize(s.in);
    for (std::size_t j = 0; j < s.out; ++j) {
      const std::size_t off = s.weight_offset + j * s.in;
      for (std::size_t k = 0; k < s.in; ++k)
        latent[k] = detail::clamp_sym(softplus(dist.raw[off + k]) * z[off + k], dist.clip);
      for (std::size_t r = 0; r < s.in; ++r) {
        double acc = 0.0;
        for (std::size_t k = 0; k < s.in; ++k) acc += v(r, k) * latent[k];
        w[off + r] += acc;
      }
    }
    if (s.bias_offset != WeightLayout::npos)
      for (std::size_t j = 0; j < s.out; ++j) {
        const std::size_t idx = s.bias_offset + j;
        w[idx] += detail::clamp_sym(softplus(dist.raw[idx]) * z[idx], dist.clip);
      }
  }
  return w;
}

/// Normalized entropy proxy (1/d) sum_k log(phi_k^2); strictly increasing in
/// every phi_k and invariant to the parameterization's basis rotation.
inline double entropy_proxy(const WeightDistribution& dist) {
  if (!dist.stochastic())
    throw ContractViolation("entropy_proxy: deterministic distribution has no scale");
  double total = 0.0;
  for (double u : dist.raw) {
    // log(softplus(u)) evaluated stably; for u << 0, softplus(u) ~ exp(u).
    const double p = softplus(u);
    total += 2.0 * (u < -30.0 ? u : std::log(p));
  }
  return total / static_cast<double>(dist.raw.size());
}

/// Gradient of entropy_proxy with respect to raw: (1/d) (2/phi_k) sigmoid(u_k).
inline std::vector<double> entropy_gradient(const WeightDistribution& dist) {
  if (!dist.stochastic())
    throw ContractViolation("entropy_gradient: deterministic distribution has no scale");
  const double scale = 2.0 / static_cast<double>(dist.raw.size());
  std::vector<double> grad(dist.raw.size());
  for (std::size_t k = 0; k < dist.raw.size(); ++k) {
    const double u = dist.raw[k];
    // sigmoid(u)/softplus(u) -> 1 as u -> -inf; guard the 0/0 underflow.
    const double ratio = u < -30.0 ? 1.0 : sigmoid(u) / softplus(u);
    grad[k] = scale * ratio;
  }
  return grad;
}

/// Pull the loss gradient with respect to the realized weights back to the
/// raw scale parameters for the z that produced those weights. Coordinates
/// whose scaled noise sits in the clamped region get zero gradient.
inline std::vector<double> chain_grad_to_raw(const WeightDistribution& dist,
                                             std::span<const double> z,
                                             std::span<const double> grad_weights) {
  if (!dist.stochastic())
    throw ContractViolation("chain_grad_to_raw: deterministic distribution");
  if (z.size() != dist.dim() || grad_weights.size() != dist.dim())
    throw ContractViolation("chain_grad_to_raw: size mismatch");

  std::vector<double> grad(dist.dim(), 0.0);
  auto pass = [&](std::size_t k) {
    if (dist.clip == kInf) return true;
    return std::fabs(softplus(dist.raw[k]) * z[k]) < dist.clip;
  };

  if (dist.kind == ParamKind::Scaling) {
    for (std::size_t k = 0; k < grad.size(); ++k)
      if (pass(k)) grad[k] = grad_weights[k] * z[k] * sigmoid(dist.raw[k]);
    return grad;
  }

  std::vector<double> latent_grad;
  for (std::size_t l = 0; l < dist.layout.layer_count(); ++l) {
    const WeightLayout::LayerShape& s = dist.layout.layer(l);
    const Matrix& v = dist.bases[l];
    latent_grad.resize(s.in);
    for (std::size_t j = 0; j < s.out; ++j) {
      const std::size_t off = s.weight_offset + j * s.in;
      for (std::size_t k = 0; k < s.in; ++k) {
        double acc = 0.0;
        for (std::size_t r = 0; r < s.in; ++r) acc += v(r, k) * grad_weights[off + r];
        latent_grad[k] = acc;
      }
      for (std::size_t k = 0; k < s.in; ++k)
        if (pass(off + k))
          grad[off + k] = latent_grad[k] * z[off + k] * sigmoid(dist.raw[off + k]);
    }
    if (s.bias_offset != WeightLayout::npos)
      for (std::size_t j = 0; j < s.out; ++j) {
        const std::size_t idx = s.bias_offset + j;
        if (pass(idx)) grad[idx] = grad_weights[idx] * z[idx] * sigmoid(dist.raw[idx]);
      }
  }
  return grad;
}

/// Uniform mixture of independently fitted distributions sharing one layout.
struct EnsembleDistribution {
  std::vector<WeightDistribution> members;

  std::size_t size() const { return members.size(); }

  void validate() const {
    if (members.empty()) throw ContractViolation("EnsembleDistribution: no members");
    const std::size_t d = members.front().dim();
    for (const WeightDistribution& m : members) {
      if (m.dim() != d)
        throw ContractViolation("EnsembleDistribution: members disagree on dimension");
      m.validate();
    }
  }
};

inline std::vector<double> ensemble_realize(const EnsembleDistribution& ens,
                                            std::size_t member_index,
                                            std::span<const double> z) {
  if (member_index >= ens.members.size())
    throw ContractViolation("ensemble_realize: member index out of range");
  return realize_weights(ens.members[member_index], z);
}

/// Draw the mixture component index pi uniformly.
inline std::size_t pick_member(const EnsembleDistribution& ens, RandomStream& stream) {
  return static_cast<std::size_t>(stream.next_below(ens.members.size()));
}

}  // namespace maxwent

#endif  // MAXWENT_STOCHASTIC_HPP_
