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

#ifndef MAXWENT_ORACLE_HPP_
#define MAXWENT_ORACLE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "maxwent/common.hpp"
#include "maxwent/matrix.hpp"
#include "maxwent/random.hpp"
#include "maxwent/stochastic.hpp"

namespace maxwent {

/// A linear-regression problem prepared for the closed-form analyses:
/// feature amplitudes, input eigenstructure and the residual of the center
/// weights. The closed forms below are the ground truth that the stochastic
/// trainer is checked against.
struct LinearInstance {
  Matrix X;
  std::vector<double> y;
  std::vector<double> wbar;    // least squares unless supplied
  double lambda = 1.0;
  std::vector<double> amp2;    // a_j^2 = (1/n) ||X_j||^2
  SymEigen eig;                // of (1/n) X^T X; eig.values are s^2, descending
  double residual = 0.0;       // eps = (1/n) ||X wbar - y||^2

  std::size_t features() const { return X.cols(); }
};

inline constexpr double kEigRidge = 1e-10;

inline LinearInstance make_linear_instance(Matrix x, std::vector<double> y, double lambda,
                                           std::optional<std::vector<double>> wbar = {}) {
  if (x.rows() != y.size()) throw ContractViolation("make_linear_instance: size mismatch");
  if (x.rows() == 0) throw ContractViolation("make_linear_instance: empty data");
  LinearInstance inst;
  inst.lambda = lambda;
  const std::size_t n = x.rows(), b = x.cols();

  inst.amp2.resize(b);
  for (std::size_t j = 0; j < b; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x(i, j) * x(i, j);
    inst.amp2[j] = acc / static_cast<double>(n);
  }
  inst.eig = sym_eigendecomposition(scaled_gram(x));

  if (wbar.has_value()) {
    if (wbar->size() != b) throw ContractViolation("make_linear_instance: wbar length mismatch");
    inst.wbar = std::move(*wbar);
  } else {
    // least squares through the eigenbasis, dropping near-null directions
    std::vector<double> xty(b, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < b; ++j) xty[j] += x(i, j) * y[i];
    for (double& v : xty) v /= static_cast<double>(n);
    inst.wbar.assign(b, 0.0);
    const double cutoff = 1e-12 * std::max(inst.eig.values[0], 1e-300);
    for (std::size_t k = 0; k < b; ++k) {
      if (inst.eig.values[k] <= cutoff) continue;
      double proj = 0.0;
      for (std::size_t j = 0; j < b; ++j) proj += inst.eig.vectors(j, k) * xty[j];
      proj /= inst.eig.values[k];
      for (std::size_t j = 0; j < b; ++j) inst.wbar[j] += proj * inst.eig.vectors(j, k);
    }
  }

  double res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double pred = 0.0;
    for (std::size_t j = 0; j < b; ++j) pred += x(i, j) * inst.wbar[j];
    res += (pred - y[i]) * (pred - y[i]);
  }
  inst.residual = res / static_cast<double>(n);
  inst.X = std::move(x);
  inst.y = std::move(y);
  return inst;
}

struct ClosedForm {
  std::vector<double> phi2;
  bool degenerate = false;  // lambda == 0 limit, all-zero spread
};

/// Optimal squared scales for independent per-feature noise: lambda / a_k^2.
inline ClosedForm closed_form_scaling(const LinearInstance& inst) {
  ClosedForm out;
  out.phi2.resize(inst.features());
  if (inst.lambda < 0.0) throw ContractViolation("closed_form_scaling: lambda must be >= 0");
  if (inst.lambda == 0.0) {
    out.degenerate = true;
    return out;
  }
  for (std::size_t k = 0; k < inst.features(); ++k) {
    if (inst.amp2[k] <= 0.0)
      throw ContractViolation("closed_form_scaling: zero amplitude at feature " +
                              std::to_string(k));
    out.phi2[k] = inst.lambda / inst.amp2[k];
  }
  return out;
}

/// Optimal squared scales in the input eigenbasis: lambda / s_k^2.
inline ClosedForm closed_form_svd(const LinearInstance& inst) {
  ClosedForm out;
  out.phi2.resize(inst.features());
  if (inst.lambda < 0.0) throw ContractViolation("closed_form_svd: lambda must be >= 0");
  if (inst.lambda == 0.0) {
    out.degenerate = true;
    return out;
  }
  std::string bad;
  for (std::size_t k = 0; k < inst.features(); ++k)
    if (inst.eig.values[k] <= kEigRidge) bad += (bad.empty() ? "" : ", ") + std::to_string(k);
  if (!bad.empty())
    throw ContractViolation("closed_form_svd: near-zero eigenvalues at indices " + bad);
  for (std::size_t k = 0; k < inst.features(); ++k)
    out.phi2[k] = inst.lambda / inst.eig.values[k];
  return out;
}

/// Average risk over the weight distribution, without Monte Carlo:
/// sum c_k phi_k^2 + eps, with c the amplitudes (Scaling) or eigenvalues
/// (Svd). phi_squared carries the squared scales.
inline double exact_expected_risk(const LinearInstance& inst,
                                  const std::vector<double>& phi_squared, ParamKind kind) {
  if (phi_squared.size() != inst.features())
    throw ContractViolation("exact_expected_risk: phi length mismatch");
  const std::vector<double>& c = kind == ParamKind::Scaling ? inst.amp2 : inst.eig.values;
  double risk = inst.residual;
  for (std::size_t k = 0; k < inst.features(); ++k) risk += c[k] * phi_squared[k];
  return risk;
}

/// Monte Carlo estimate of the same average risk; returns (mean, standard
/// error). Convergence toward exact_expected_risk is part of the oracle
/// cross-checks.
inline std::pair<double, double> mc_expected_risk(const LinearInstance& inst,
                                                  const std::vector<double>& phi_squared,
                                                  ParamKind kind, std::size_t samples,
                                                  RandomStream& stream) {
  const std::size_t n = inst.X.rows(), b = inst.features();
  std::vector<double> phi(b);
  for (std::size_t k = 0; k < b; ++k) phi[k] = std::sqrt(phi_squared[k]);

  double sum = 0.0, sumsq = 0.0;
  std::vector<double> w(b), z(b);
  for (std::size_t s = 0; s < samples; ++s) {
    stream.fill(z.begin(), z.end());
    if (kind == ParamKind::Scaling) {
      for (std::size_t k = 0; k < b; ++k) w[k] = inst.wbar[k] + phi[k] * z[k];
    } else {
      for (std::size_t j = 0; j < b; ++j) {
        double acc = inst.wbar[j];
        for (std::size_t k = 0; k < b; ++k) acc += inst.eig.vectors(j, k) * phi[k] * z[k];
        w[j] = acc;
      }
    }
    double risk = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double pred = 0.0;
      for (std::size_t j = 0; j < b; ++j) pred += inst.X(i, j) * w[j];
      risk += (pred - inst.y[i]) * (pred - inst.y[i]);
    }
    risk /= static_cast<double>(n);
    sum += risk;
    sumsq += risk * risk;
  }
  const double mean = sum / static_cast<double>(samples);
  const double var = std::max(sumsq / static_cast<double>(samples) - mean * mean, 0.0);
  return {mean, std::sqrt(var / static_cast<double>(samples))};
}

struct GdSolution {
  std::vector<double> phi2;
  std::size_t iterations = 0;
  double grad_norm = 0.0;
};

/// Gradient descent with backtracking on the exact-expectation objective
/// sum c_k phi_k^2 - lambda sum log(phi_k^2), optimized over log phi^2 so
/// positivity is unconstrained. Converges to max-abs gradient <= 1e-8 or
/// throws.
inline GdSolution gd_solve_linear(const LinearInstance& inst, ParamKind kind,
                                  std::size_t steps = 200000, double lr = 0.5) {
  if (!(inst.lambda > 0.0))
    throw ContractViolation("gd_solve_linear: lambda must be positive");
  const std::vector<double>& c = kind == ParamKind::Scaling ? inst.amp2 : inst.eig.values;
  const std::size_t b = inst.features();
  for (std::size_t k = 0; k < b; ++k)
    if (c[k] <= (kind == ParamKind::Scaling ? 0.0 : kEigRidge))
      throw ContractViolation("gd_solve_linear: instance invalid for this kind");

  const double lambda = inst.lambda;
  auto objective = [&](const std::vector<double>& t) {
    double f = 0.0;
    for (std::size_t k = 0; k < b; ++k) f += c[k] * std::exp(t[k]) - lambda * t[k];
    return f;
  };

  std::vector<double> t(b, 0.0), grad(b), trial(b);
  double step = lr;
  GdSolution sol;
  for (std::size_t it = 0; it < steps; ++it) {
    double gmax = 0.0, gsq = 0.0;
    for (std::size_t k = 0; k < b; ++k) {
      grad[k] = c[k] * std::exp(t[k]) - lambda;
      gmax = std::max(gmax, std::fabs(grad[k]));
      gsq += grad[k] * grad[k];
    }
    sol.grad_norm = gmax;
    sol.iterations = it;
    if (gmax <= 1e-8) {
      sol.phi2.resize(b);
      for (std::size_t k = 0; k < b; ++k) sol.phi2[k] = std::exp(t[k]);
      return sol;
    }

    if (gmax <= 1e-3 * lambda) {
      // Near the optimum every coordinate's curvature is lambda to within
      // 0.1%, so a fixed step of 0.5/lambda contracts the gradient by ~0.5
      // per iteration. Objective differences are below double resolution
      // here, which is why the line search cannot certify them.
      for (std::size_t k = 0; k < b; ++k) t[k] -= 0.5 / lambda * grad[k];
      continue;
    }

    const double f0 = objective(t);
    bool moved = false;
    for (int half = 0; half < 70; ++half) {
      for (std::size_t k = 0; k < b; ++k) trial[k] = t[k] - step * grad[k];
      if (objective(trial) <= f0 - 1e-4 * step * gsq) {
        t = trial;
        step = std::min(step * 1.5, lr);
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved)
      throw NumericalError("gd_solve_linear: line search stalled, gradient norm " +
                           std::to_string(gmax));
  }
  throw NumericalError("gd_solve_linear: no convergence in " + std::to_string(steps) +
                       " steps, gradient norm " + std::to_string(sol.grad_norm));
}

struct ParamComparison {
  double risk_scaling = 0.0;
  double risk_svd = 0.0;
  double entropy_scaling = 0.0;  // sum_k log phi_k^2 at the optimum
  double entropy_svd = 0.0;
};

/// Both optimal parameterizations reach average risk lambda*b + eps; the
/// eigenbasis one never has less entropy (Hadamard).
inline ParamComparison prop_comparison(const LinearInstance& inst) {
  const ClosedForm scal = closed_form_scaling(inst);
  const ClosedForm svd = closed_form_svd(inst);
  ParamComparison cmp;
  cmp.risk_scaling = exact_expected_risk(inst, scal.phi2, ParamKind::Scaling);
  cmp.risk_svd = exact_expected_risk(inst, svd.phi2, ParamKind::Svd);
  for (std::size_t k = 0; k < inst.features(); ++k) {
    cmp.entropy_scaling += std::log(scal.phi2[k]);
    cmp.entropy_svd += std::log(svd.phi2[k]);
  }
  return cmp;
}

/// Per-dimension constant linking the exact differential entropy to the
/// normalized proxy: H_exact = d*K + (d/2)*proxy.
inline double law_entropy_constant(SampleLaw law) {
  if (law == SampleLaw::StandardNormal) return 0.5 * std::log(2.0 * M_PI * std::exp(1.0));
  return std::log(2.0 * kSqrt3);
}

namespace detail {

inline double det_small(const Matrix& m) {
  switch (m.rows()) {
    case 1:
      return m(0, 0);
    case 2:
      return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    case 3:
      return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
             m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
             m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
    default:
      throw ContractViolation("det_small: dimension must be <= 3");
  }
}

// Full d x d mixing matrix of the distribution: identity for Scaling,
// per-layer basis blocks (biases untouched) for Svd.
inline Matrix mixing_matrix(const WeightDistribution& dist) {
  const std::size_t d = dist.dim();
  Matrix a = Matrix::identity(d);
  if (dist.kind != ParamKind::Svd) return a;
  for (std::size_t l = 0; l < dist.layout.layer_count(); ++l) {
    const auto& s = dist.layout.layer(l);
    const Matrix& v = dist.bases[l];
    for (std::size_t j = 0; j < s.out; ++j) {
      const std::size_t off = s.weight_offset + j * s.in;
      for (std::size_t r = 0; r < s.in; ++r)
        for (std::size_t k = 0; k < s.in; ++k) a(off + r, off + k) = v(r, k);
    }
  }
  return a;
}

}  // namespace detail

/// Exact differential entropy of the weight distribution by direct
/// determinant / volume computation, d <= 3 only. Independent of the proxy.
inline double exact_entropy_smalld(const WeightDistribution& dist) {
  const std::size_t d = dist.dim();
  if (d > 3) throw ContractViolation("exact_entropy_smalld: dimension must be <= 3");
  if (!dist.stochastic()) throw ContractViolation("exact_entropy_smalld: no scale parameters");

  const Matrix a = detail::mixing_matrix(dist);
  const std::vector<double> phi = dist.phi_vector();

  if (dist.law == SampleLaw::StandardNormal) {
    // covariance A diag(phi^2) A^T
    Matrix cov(d, d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < d; ++k) acc += a(i, k) * phi[k] * phi[k] * a(j, k);
        cov(i, j) = acc;
      }
    const double dd = static_cast<double>(d);
    return 0.5 * dd * std::log(2.0 * M_PI) + 0.5 * dd +
           0.5 * std::log(std::fabs(detail::det_small(cov)));
  }

  // uniform law: log volume of the parallelotope spanned by 2 sqrt(3) A diag(phi)
  Matrix edges(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) edges(i, j) = 2.0 * kSqrt3 * a(i, j) * phi[j];
  return std::log(std::fabs(detail::det_small(edges)));
}

}  // namespace maxwent

#endif  // MAXWENT_ORACLE_HPP_
