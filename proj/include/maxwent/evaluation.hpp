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

#ifndef MAXWENT_EVALUATION_HPP_
#define MAXWENT_EVALUATION_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "maxwent/common.hpp"
#include "maxwent/data.hpp"
#include "maxwent/network.hpp"
#include "maxwent/random.hpp"
#include "maxwent/stochastic.hpp"

namespace maxwent {

/// P stochastic predictions for one input: (mu, sigma) pairs for regression,
/// probability vectors (binary stored as two classes) for classification.
struct PredictionSample {
  bool classification = false;
  std::vector<double> mu, sigma;
  std::vector<std::vector<double>> probs;

  std::size_t draws() const { return classification ? probs.size() : mu.size(); }
};

namespace detail {

inline void append_outputs(const NetworkSpec& spec, const Matrix& outputs,
                           std::vector<PredictionSample>& samples) {
  for (std::size_t i = 0; i < outputs.rows(); ++i) {
    PredictionSample& s = samples[i];
    switch (spec.head) {
      case Head::GaussianRegression:
        s.classification = false;
        s.mu.push_back(outputs(i, 0));
        s.sigma.push_back(outputs(i, 1));
        break;
      case Head::BinaryClassification:
        s.classification = true;
        s.probs.push_back({1.0 - outputs(i, 0), outputs(i, 0)});
        break;
      case Head::MultiClass: {
        s.classification = true;
        std::vector<double> p(outputs.cols());
        for (std::size_t j = 0; j < outputs.cols(); ++j) p[j] = outputs(i, j);
        s.probs.push_back(std::move(p));
        break;
      }
      default:
        throw ContractViolation("predict_samples: head has no predictive distribution");
    }
  }
}

}  // namespace detail

/// P reparameterized draws, each realized to weights and forward-evaluated.
inline std::vector<PredictionSample> predict_samples(const WeightDistribution& dist,
                                                     const NetworkSpec& spec, const Matrix& x,
                                                     std::size_t p, RandomStream& stream) {
  if (p == 0) throw ContractViolation("predict_samples: p must be >= 1");
  std::vector<PredictionSample> samples(x.rows());
  for (std::size_t j = 0; j < p; ++j) {
    const std::vector<double> z = sample_z(stream, dist.dim());
    const std::vector<double> w = realize_weights(dist, z);
    const ForwardResult f = forward(spec, dist.layout, w, x);
    detail::append_outputs(spec, f.outputs, samples);
  }
  return samples;
}

/// Ensemble inference pools p draws per member (members in index order).
inline std::vector<PredictionSample> predict_samples(const EnsembleDistribution& ens,
                                                     const NetworkSpec& spec, const Matrix& x,
                                                     std::size_t p, RandomStream& stream) {
  if (p == 0) throw ContractViolation("predict_samples: p must be >= 1");
  std::vector<PredictionSample> samples(x.rows());
  for (const WeightDistribution& member : ens.members) {
    for (std::size_t j = 0; j < p; ++j) {
      const std::vector<double> z = sample_z(stream, member.dim());
      const std::vector<double> w = realize_weights(member, z);
      const ForwardResult f = forward(spec, member.layout, w, x);
      detail::append_outputs(spec, f.outputs, samples);
    }
  }
  return samples;
}

/// Shannon entropy (natural log) of the draw-averaged probability vector.
inline double uncertainty_classification(const PredictionSample& sample) {
  if (!sample.classification || sample.probs.empty())
    throw ContractViolation("uncertainty_classification: not a classification sample");
  const std::size_t k = sample.probs.front().size();
  std::vector<double> mean(k, 0.0);
  for (const auto& p : sample.probs)
    for (std::size_t j = 0; j < k; ++j) mean[j] += p[j];
  double entropy = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const double pj = mean[j] / static_cast<double>(sample.probs.size());
    if (pj > 0.0) entropy -= pj * std::log(pj);
  }
  return entropy;
}

/// Variance of the Gaussian-mixture approximation of the P predictive
/// heads: (1/P) sum (sigma_i^2 + mu_i^2) - mean(mu)^2.
inline double uncertainty_regression(const PredictionSample& sample) {
  if (sample.classification || sample.mu.empty())
    throw ContractViolation("uncertainty_regression: not a regression sample");
  const double inv_p = 1.0 / static_cast<double>(sample.mu.size());
  double mean_mu = 0.0, mean_sq = 0.0;
  for (std::size_t i = 0; i < sample.mu.size(); ++i) {
    mean_mu += sample.mu[i];
    mean_sq += sample.sigma[i] * sample.sigma[i] + sample.mu[i] * sample.mu[i];
  }
  mean_mu *= inv_p;
  return mean_sq * inv_p - mean_mu * mean_mu;
}

/// Uncertainty score of one sample, dispatching on the task.
inline double uncertainty_score(const PredictionSample& sample) {
  return sample.classification ? uncertainty_classification(sample)
                               : uncertainty_regression(sample);
}

inline std::vector<double> uncertainty_scores(const std::vector<PredictionSample>& samples) {
  std::vector<double> scores(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) scores[i] = uncertainty_score(samples[i]);
  return scores;
}

/// Probability that a random out-of-distribution score exceeds a random
/// in-distribution score, ties counted one half (rank statistic, exact
/// integer pair counting).
inline double auroc(const std::vector<double>& scores_id, const std::vector<double>& scores_ood) {
  if (scores_id.empty() || scores_ood.empty())
    throw ContractViolation("auroc: score lists must be non-empty");
  std::vector<double> id_sorted = scores_id;
  std::sort(id_sorted.begin(), id_sorted.end());
  std::uint64_t twice_pairs = 0;
  for (double s : scores_ood) {
    const auto lo = std::lower_bound(id_sorted.begin(), id_sorted.end(), s);
    const auto hi = std::upper_bound(lo, id_sorted.end(), s);
    twice_pairs += 2 * static_cast<std::uint64_t>(lo - id_sorted.begin());
    twice_pairs += static_cast<std::uint64_t>(hi - lo);
  }
  const double denom = 2.0 * static_cast<double>(scores_id.size()) *
                       static_cast<double>(scores_ood.size());
  return static_cast<double>(twice_pairs) / denom;
}

/// False-positive rate at >= 95% true-positive rate. The threshold is the
/// smallest score of the top ceil(0.95 m) out-of-distribution scores and the
/// positive decision is inclusive (score >= threshold) on both sides.
inline double fpr_at_95_tpr(const std::vector<double>& scores_id,
                            const std::vector<double>& scores_ood) {
  if (scores_id.empty() || scores_ood.empty())
    throw ContractViolation("fpr_at_95_tpr: score lists must be non-empty");
  std::vector<double> ood_sorted = scores_ood;
  std::sort(ood_sorted.begin(), ood_sorted.end(), std::greater<double>());
  const auto m = static_cast<double>(ood_sorted.size());
  const auto k = static_cast<std::size_t>(std::ceil(0.95 * m));
  const double threshold = ood_sorted[k - 1];
  std::size_t fp = 0;
  for (double s : scores_id)
    if (s >= threshold) ++fp;
  return static_cast<double>(fp) / static_cast<double>(scores_id.size());
}

/// Test negative log likelihood. Regression scores each point under the
/// Gaussian-mixture approximation N(mean mu, u(x)) with the 1/2 log(2 pi)
/// constant included; classification scores the draw-averaged probability of
/// the true label.
inline double test_nll(const std::vector<PredictionSample>& samples,
                       const std::vector<double>& y) {
  if (samples.size() != y.size()) throw ContractViolation("test_nll: size mismatch");
  if (samples.empty()) throw ContractViolation("test_nll: empty sample list");
  double total = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const PredictionSample& s = samples[i];
    if (s.classification) {
      const std::size_t k = s.probs.front().size();
      const auto label = static_cast<std::size_t>(std::llround(y[i]));
      if (label >= k) throw ContractViolation("test_nll: label out of range");
      double mean = 0.0;
      for (const auto& p : s.probs) mean += p[label];
      mean /= static_cast<double>(s.probs.size());
      total -= std::log(std::max(mean, kProbClip));
    } else {
      double mean_mu = 0.0;
      for (double m : s.mu) mean_mu += m;
      mean_mu /= static_cast<double>(s.mu.size());
      const double variance = std::max(uncertainty_regression(s), 1e-12);
      const double r = y[i] - mean_mu;
      total += 0.5 * (std::log(2.0 * M_PI * variance) + r * r / variance);
    }
  }
  return total / static_cast<double>(samples.size());
}

/// Spearman rank correlation with midranks; 0 when either input has no
/// rank variation.
inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty()) throw ContractViolation("spearman: size mismatch");
  auto midranks = [](const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
      const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
      i = j + 1;
    }
    return ranks;
  };
  const std::vector<double> ra = midranks(a), rb = midranks(b);
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= n;
  mb /= n;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (ra[i] - ma) * (rb[i] - mb);
    va += (ra[i] - ma) * (ra[i] - ma);
    vb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (va <= 0.0 || vb <= 0.0) return 0.0;
  return cov / std::sqrt(va * vb);
}

/// Per-layer pairing of neuron activation amplitudes (estimated under the
/// fitted distribution with a fixed number of z draws) against the average
/// squared scale of the weights in front of each neuron.
struct AmplitudeDiagnostic {
  struct Layer {
    std::vector<double> amplitude2;  // indexed by in-neuron of weight layer l
    std::vector<double> mean_phi2;
    double spearman = 0.0;
  };
  std::vector<Layer> layers;
};

inline AmplitudeDiagnostic amplitude_diagnostic(const WeightDistribution& dist,
                                                const NetworkSpec& spec, const Matrix& x_train,
                                                std::size_t z_draws = 32,
                                                std::uint64_t seed = 0x414D50) {
  if (dist.kind != ParamKind::Scaling)
    throw ContractViolation("amplitude_diagnostic: requires a Scaling-kind distribution");
  if (!dist.stochastic())
    throw ContractViolation("amplitude_diagnostic: distribution has no scale parameters");

  const WeightLayout& layout = dist.layout;
  AmplitudeDiagnostic diag;
  diag.layers.resize(layout.layer_count());
  for (std::size_t l = 0; l < layout.layer_count(); ++l) {
    diag.layers[l].amplitude2.assign(layout.layer(l).in, 0.0);
    diag.layers[l].mean_phi2.assign(layout.layer(l).in, 0.0);
  }

  RandomStream stream(seed, dist.law);
  const double n = static_cast<double>(x_train.rows());
  for (std::size_t draw = 0; draw < z_draws; ++draw) {
    const std::vector<double> z = sample_z(stream, dist.dim());
    const std::vector<double> w = realize_weights(dist, z);
    const ForwardResult f = forward(spec, layout, w, x_train);
    for (std::size_t l = 0; l < layout.layer_count(); ++l) {
      const Matrix& rep = f.hidden[l];
      for (std::size_t i = 0; i < rep.rows(); ++i)
        for (std::size_t k = 0; k < rep.cols(); ++k)
          diag.layers[l].amplitude2[k] += rep(i, k) * rep(i, k);
    }
  }

  for (std::size_t l = 0; l < layout.layer_count(); ++l) {
    const auto& shape = layout.layer(l);
    for (double& v : diag.layers[l].amplitude2) v /= n * static_cast<double>(z_draws);
    for (std::size_t k = 0; k < shape.in; ++k) {
      double acc = 0.0;
      for (std::size_t j = 0; j < shape.out; ++j) {
        const double phi = dist.phi(layout.weight_index(l, k, j));
        acc += phi * phi;
      }
      diag.layers[l].mean_phi2[k] = acc / static_cast<double>(shape.out);
    }
    diag.layers[l].spearman = spearman(diag.layers[l].amplitude2, diag.layers[l].mean_phi2);
  }
  return diag;
}

inline SampleLaw law_of(const WeightDistribution& dist) { return dist.law; }
inline SampleLaw law_of(const EnsembleDistribution& ens) { return ens.members.front().law; }

/// Scores, ranking metrics and test likelihood for one in-distribution /
/// out-of-distribution pair.
struct OodEvaluation {
  std::vector<double> scores_id, scores_ood;
  double auroc_value = 0.0;
  double fpr95 = 0.0;
  double nll = 0.0;
};

template <typename Model>
OodEvaluation evaluate_ood(const Model& model, const NetworkSpec& spec, const Dataset& id_data,
                           const Dataset& ood_data, std::size_t p, std::uint64_t seed) {
  RandomStream stream(derive_seed(seed, 90), law_of(model));
  const std::vector<PredictionSample> id_samples =
      predict_samples(model, spec, id_data.X, p, stream);
  const std::vector<PredictionSample> ood_samples =
      predict_samples(model, spec, ood_data.X, p, stream);

  OodEvaluation eval;
  eval.scores_id = uncertainty_scores(id_samples);
  eval.scores_ood = uncertainty_scores(ood_samples);
  eval.auroc_value = auroc(eval.scores_id, eval.scores_ood);
  eval.fpr95 = fpr_at_95_tpr(eval.scores_id, eval.scores_ood);
  eval.nll = test_nll(id_samples, id_data.y);
  return eval;
}

}  // namespace maxwent

#endif  // MAXWENT_EVALUATION_HPP_
