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

#ifndef MAXWENT_TRAINER_HPP_
#define MAXWENT_TRAINER_HPP_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "maxwent/common.hpp"
#include "maxwent/data.hpp"
#include "maxwent/io.hpp"
#include "maxwent/network.hpp"
#include "maxwent/random.hpp"
#include "maxwent/stochastic.hpp"

namespace maxwent {

struct TrainConfig {
  double lambda = 10.0;         // weight of the normalized entropy proxy
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::size_t pretrain_iters = 10000;
  std::size_t maxwent_iters = 20000;
  std::size_t mc_samples = 1;   // z draws per gradient estimate
  std::uint64_t seed = 0;
  std::size_t val_check_every = 100;
  double u_init = -5.0;         // -10 recommended for the Svd kind
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  bool sample_with_replacement = false;  // uniform batches instead of shuffled epochs
  std::size_t val_z_samples = 10;        // fixed draws for the acceptance test
  double bnn_prior_sigma = 1.0;

  void validate() const {
    if (lambda < 0.0) throw ContractViolation("TrainConfig: lambda must be >= 0");
    if (learning_rate <= 0.0) throw ContractViolation("TrainConfig: learning_rate must be > 0");
    if (batch_size == 0 || mc_samples == 0 || val_check_every == 0 || val_z_samples == 0)
      throw ContractViolation("TrainConfig: counts must be >= 1");
  }
};

inline double default_u_init(ParamKind kind) {
  return kind == ParamKind::Svd ? -10.0 : -5.0;
}

struct TrainLogRow {
  std::int64_t iteration = 0;
  double train_loss = 0.0;
  double val_nll = 0.0;
  double entropy = 0.0;
  bool accepted = false;
};

inline std::string training_log_csv(const std::vector<TrainLogRow>& rows) {
  std::string out = "iteration,train_loss,val_nll,entropy_proxy,accepted\n";
  for (const TrainLogRow& r : rows) {
    out += std::to_string(r.iteration) + "," + format_double(r.train_loss) + "," +
           format_double(r.val_nll) + "," + format_double(r.entropy) + "," +
           (r.accepted ? "1" : "0") + "\n";
  }
  return out;
}

inline void write_training_log(const std::string& path, const std::vector<TrainLogRow>& rows) {
  atomic_write_text(path, training_log_csv(rows));
}

/// Adam with bias correction; elementwise, state owned here.
class Adam {
 public:
  Adam(std::size_t dim, const TrainConfig& cfg)
      : lr_(cfg.learning_rate),
        b1_(cfg.adam_beta1),
        b2_(cfg.adam_beta2),
        eps_(cfg.adam_eps),
        m_(dim, 0.0),
        v_(dim, 0.0) {}

  void step(std::vector<double>& params, const std::vector<double>& grad) {
    b1t_ *= b1_;
    b2t_ *= b2_;
    for (std::size_t k = 0; k < params.size(); ++k) {
      m_[k] = b1_ * m_[k] + (1.0 - b1_) * grad[k];
      v_[k] = b2_ * v_[k] + (1.0 - b2_) * grad[k] * grad[k];
      const double mhat = m_[k] / (1.0 - b1t_);
      const double vhat = v_[k] / (1.0 - b2t_);
      params[k] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }

 private:
  double lr_, b1_, b2_, eps_;
  std::vector<double> m_, v_;
  double b1t_ = 1.0, b2t_ = 1.0;
};

/// Mini-batch source: shuffled epochs by default, uniform with replacement
/// when the config asks for the literal sampling scheme.
class MiniBatcher {
 public:
  MiniBatcher(const Dataset& data, std::size_t batch_size, std::uint64_t seed,
              bool with_replacement)
      : data_(data),
        batch_(std::min(batch_size, data.n())),
        with_replacement_(with_replacement),
        stream_(seed),
        order_(data.n()) {
    if (data.n() == 0) throw ContractViolation("MiniBatcher: empty dataset");
    std::iota(order_.begin(), order_.end(), 0);
    pos_ = order_.size();  // force a shuffle on first use
  }

  Batch next() {
    const std::size_t b = data_.features();
    Batch batch;
    batch.X = Matrix(batch_, b);
    batch.y.resize(batch_);
    for (std::size_t i = 0; i < batch_; ++i) {
      const std::size_t row = with_replacement_ ? stream_.next_below(data_.n()) : next_index();
      for (std::size_t j = 0; j < b; ++j) batch.X(i, j) = data_.X(row, j);
      batch.y[i] = data_.y[row];
    }
    return batch;
  }

 private:
  std::size_t next_index() {
    if (pos_ >= order_.size()) {
      for (std::size_t i = order_.size(); i > 1; --i)
        std::swap(order_[i - 1], order_[stream_.next_below(i)]);
      pos_ = 0;
    }
    return order_[pos_++];
  }

  const Dataset& data_;
  std::size_t batch_;
  bool with_replacement_;
  RandomStream stream_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
};

inline Batch as_batch(const Dataset& ds) {
  Batch b;
  b.X = ds.X;
  b.y = ds.y;
  return b;
}

/// Glorot-uniform weights, zero biases.
inline std::vector<double> glorot_init(const WeightLayout& layout, std::uint64_t seed) {
  std::vector<double> w(layout.total_dim(), 0.0);
  RandomStream stream(seed);
  for (std::size_t l = 0; l < layout.layer_count(); ++l) {
    const auto& s = layout.layer(l);
    const double limit = std::sqrt(6.0 / static_cast<double>(s.in + s.out));
    for (std::size_t k = 0; k < s.in * s.out; ++k)
      w[s.weight_offset + k] = limit * (2.0 * stream.next_unit() - 1.0);
  }
  return w;
}

inline NetworkSpec spec_for_task(const Dataset& ds, std::vector<std::size_t> hidden = {100, 100,
                                                                                       100}) {
  NetworkSpec spec;
  spec.input_dim = ds.features();
  spec.hidden = std::move(hidden);
  switch (ds.task) {
    case Task::Regression: spec.head = Head::GaussianRegression; break;
    case Task::BinaryClassification: spec.head = Head::BinaryClassification; break;
    case Task::MultiClass:
      spec.head = Head::MultiClass;
      spec.classes = ds.classes;
      break;
  }
  return spec;
}

struct PretrainResult {
  std::vector<double> weights;
  std::vector<TrainLogRow> log;
  std::int64_t best_iteration = 0;
};

/// Adam minimization of the head loss with the best-validation weights
/// restored at the end.
inline PretrainResult pretrain(const NetworkSpec& spec, const Dataset& train, const Dataset& val,
                               const TrainConfig& cfg) {
  cfg.validate();
  if (train.n() == 0 || val.n() == 0) throw ContractViolation("pretrain: empty train or val");
  const WeightLayout layout = WeightLayout::from_spec(spec);

  PretrainResult result;
  result.weights = glorot_init(layout, derive_seed(cfg.seed, 0));
  if (cfg.pretrain_iters == 0) return result;

  MiniBatcher batcher(train, cfg.batch_size, derive_seed(cfg.seed, 1),
                      cfg.sample_with_replacement);
  const Batch val_batch = as_batch(val);
  Adam adam(layout.total_dim(), cfg);

  std::vector<double> best = result.weights;
  double best_val = kInf;
  double loss_acc = 0.0;
  std::size_t loss_count = 0;

  for (std::size_t t = 1; t <= cfg.pretrain_iters; ++t) {
    const Batch batch = batcher.next();
    const LossGrad lg = loss_and_grad(spec, layout, result.weights, batch);
    if (!std::isfinite(lg.loss))
      throw NumericalError("pretrain: non-finite loss at iteration " + std::to_string(t));
    adam.step(result.weights, lg.grad);
    loss_acc += lg.loss;
    ++loss_count;

    if (t % cfg.val_check_every == 0 || t == cfg.pretrain_iters) {
      const double val_loss = batch_loss(spec, layout, result.weights, val_batch);
      const bool improved = val_loss < best_val;
      if (improved) {
        best_val = val_loss;
        best = result.weights;
        result.best_iteration = static_cast<std::int64_t>(t);
      }
      result.log.push_back({static_cast<std::int64_t>(t), loss_acc / loss_count, val_loss, 0.0,
                            improved});
      loss_acc = 0.0;
      loss_count = 0;
    }
  }
  result.weights = std::move(best);
  return result;
}

/// Acceptance threshold: validation loss of the center weights plus twice
/// the standard error of the per-sample losses.
inline double validation_threshold(std::span<const double> wbar, const NetworkSpec& spec,
                                   const Dataset& val) {
  if (val.n() == 0) throw ContractViolation("validation_threshold: empty validation set");
  const WeightLayout layout = WeightLayout::from_spec(spec);
  const Batch vb = as_batch(val);
  vb.validate(spec);
  const ForwardResult f = forward(spec, layout, wbar, vb.X);
  const std::vector<double> losses = per_sample_losses(spec, f.outputs, vb.y);
  double mean = 0.0;
  for (double v : losses) mean += v;
  mean /= static_cast<double>(losses.size());
  double sq = 0.0;
  for (double v : losses) sq += (v - mean) * (v - mean);
  return mean + 2.0 / static_cast<double>(losses.size()) * std::sqrt(sq);
}

/// One orthogonal basis per weight layer: eigenvectors of (1/n) psi^T psi of
/// that layer's input representation under the center weights.
inline std::vector<Matrix> build_svd_bases(const NetworkSpec& spec, const WeightLayout& layout,
                                           std::span<const double> wbar, const Matrix& x_train) {
  const ForwardResult f = forward(spec, layout, wbar, x_train);
  std::vector<Matrix> bases;
  bases.reserve(f.hidden.size());
  for (const Matrix& rep : f.hidden)
    bases.push_back(sym_eigendecomposition(scaled_gram(rep)).vectors);
  return bases;
}

struct FitResult {
  WeightDistribution fitted;       // last accepted scales (or the initialization)
  WeightDistribution final_state;  // end-of-run scales, regardless of acceptance
  std::vector<TrainLogRow> log;
  double tau = std::numeric_limits<double>::quiet_NaN();
  std::int64_t accepted_iteration = -1;
};

/// Validation NLL of the stochastic model's prediction, marginalized over a
/// fixed set of z draws: the draw-averaged probability for classification,
/// the Gaussian-mixture approximation for regression (same additive
/// convention as the training loss, so the value is comparable to tau).
inline double predictive_val_nll(const NetworkSpec& spec, const WeightLayout& layout,
                                 const WeightDistribution& dist,
                                 const std::vector<std::vector<double>>& val_z,
                                 const Batch& val_batch) {
  if (val_z.empty()) throw ContractViolation("predictive_val_nll: no validation draws");
  const std::size_t n = val_batch.X.rows();
  const std::size_t draws = val_z.size();
  std::vector<Matrix> outputs;
  outputs.reserve(draws);
  for (const auto& z : val_z)
    outputs.push_back(forward(spec, layout, realize_weights(dist, z), val_batch.X).outputs);

  double total = 0.0;
  switch (spec.head) {
    case Head::LinearRegression:
      for (std::size_t i = 0; i < n; ++i) {
        double mean = 0.0;
        for (const Matrix& out : outputs) mean += out(i, 0);
        mean /= static_cast<double>(draws);
        const double r = mean - val_batch.y[i];
        total += r * r;
      }
      break;
    case Head::GaussianRegression:
      for (std::size_t i = 0; i < n; ++i) {
        double mean_mu = 0.0, mean_sq = 0.0;
        for (const Matrix& out : outputs) {
          mean_mu += out(i, 0);
          mean_sq += out(i, 0) * out(i, 0) + out(i, 1) * out(i, 1);
        }
        mean_mu /= static_cast<double>(draws);
        mean_sq /= static_cast<double>(draws);
        const double variance = std::max(mean_sq - mean_mu * mean_mu, 1e-12);
        const double r = val_batch.y[i] - mean_mu;
        total += 0.5 * (std::log(variance) + r * r / variance);
      }
      break;
    case Head::BinaryClassification:
      for (std::size_t i = 0; i < n; ++i) {
        double mean = 0.0;
        for (const Matrix& out : outputs) mean += out(i, 0);
        mean /= static_cast<double>(draws);
        mean = std::min(std::max(mean, kProbClip), 1.0 - kProbClip);
        total -= val_batch.y[i] * std::log(mean) + (1.0 - val_batch.y[i]) * std::log(1.0 - mean);
      }
      break;
    case Head::MultiClass:
      for (std::size_t i = 0; i < n; ++i) {
        const auto label = static_cast<std::size_t>(std::llround(val_batch.y[i]));
        double mean = 0.0;
        for (const Matrix& out : outputs) mean += out(i, label);
        mean /= static_cast<double>(draws);
        total -= std::log(std::max(mean, kProbClip));
      }
      break;
  }
  return total / static_cast<double>(n);
}

/// Stochastic variational ascent of the weight entropy under the risk
/// penalty: only the raw scale parameters move, the mean stays frozen.
/// Every val_check_every iterations the validation loss is estimated on a
/// fixed set of pre-drawn z samples and the current scales are recorded as
/// the accepted checkpoint when that estimate stays below tau.
inline FitResult maxwent_fit(const WeightDistribution& dist_init, const NetworkSpec& spec,
                             const Dataset& train, const Dataset& val, const TrainConfig& cfg) {
  cfg.validate();
  if (!dist_init.stochastic())
    throw ContractViolation("maxwent_fit: distribution has no scale parameters");
  dist_init.validate();

  const WeightLayout& layout = dist_init.layout;
  const std::size_t d = dist_init.dim();
  WeightDistribution dist = dist_init;

  MiniBatcher batcher(train, cfg.batch_size, derive_seed(cfg.seed, 2),
                      cfg.sample_with_replacement);
  RandomStream z_stream(derive_seed(cfg.seed, 3), dist.law);
  RandomStream val_z_stream(derive_seed(cfg.seed, 4), dist.law);

  std::vector<std::vector<double>> val_z(cfg.val_z_samples);
  for (auto& z : val_z) z = sample_z(val_z_stream, d);
  const Batch val_batch = as_batch(val);

  FitResult result;
  result.tau = validation_threshold(dist.mean, spec, val);
  std::vector<double> accepted_raw = dist.raw;

  Adam adam(d, cfg);
  std::vector<double> grad(d), z(d);
  double loss_acc = 0.0;
  std::size_t loss_count = 0;

  auto validation_nll = [&]() {
    return predictive_val_nll(spec, layout, dist, val_z, val_batch);
  };

  for (std::size_t t = 1; t <= cfg.maxwent_iters; ++t) {
    const Batch batch = batcher.next();
    std::fill(grad.begin(), grad.end(), 0.0);
    double loss_mean = 0.0;
    for (std::size_t s = 0; s < cfg.mc_samples; ++s) {
      z_stream.fill(z.begin(), z.end());
      const std::vector<double> w = realize_weights(dist, z);
      LossGrad lg;
      try {
        lg = loss_and_grad(spec, layout, w, batch);
      } catch (const NumericalError& e) {
        throw NumericalError("maxwent_fit: iteration " + std::to_string(t) + ": " + e.what());
      }
      const std::vector<double> gu = chain_grad_to_raw(dist, z, lg.grad);
      for (std::size_t k = 0; k < d; ++k) grad[k] += gu[k];
      loss_mean += lg.loss;
    }
    const double inv_s = 1.0 / static_cast<double>(cfg.mc_samples);
    loss_mean *= inv_s;

    const double entropy = entropy_proxy(dist);
    const double objective = loss_mean - cfg.lambda * entropy;
    if (!std::isfinite(objective))
      throw NumericalError("maxwent_fit: non-finite objective at iteration " +
                           std::to_string(t));

    const std::vector<double> eg = entropy_gradient(dist);
    for (std::size_t k = 0; k < d; ++k) grad[k] = grad[k] * inv_s - cfg.lambda * eg[k];
    adam.step(dist.raw, grad);

    loss_acc += loss_mean;
    ++loss_count;
    if (t % cfg.val_check_every == 0 || t == cfg.maxwent_iters) {
      const double val_nll = validation_nll();
      const bool accept = val_nll <= result.tau;
      if (accept) {
        accepted_raw = dist.raw;
        result.accepted_iteration = static_cast<std::int64_t>(t);
      }
      result.log.push_back({static_cast<std::int64_t>(t), loss_acc / loss_count, val_nll,
                            entropy_proxy(dist), accept});
      loss_acc = 0.0;
      loss_count = 0;
    }
  }

  result.final_state = dist;
  dist.raw = std::move(accepted_raw);
  result.fitted = std::move(dist);
  return result;
}

/// Kullback-Leibler divergence between a diagonal Gaussian N(mu, diag(sigma^2))
/// and the isotropic prior N(0, sigma0^2 Id).
inline double bnn_kl(std::span<const double> mu, std::span<const double> sigma, double sigma0) {
  if (mu.size() != sigma.size()) throw ContractViolation("bnn_kl: size mismatch");
  if (!(sigma0 > 0.0)) throw ContractViolation("bnn_kl: sigma0 must be > 0");
  const double s02 = sigma0 * sigma0;
  double mu_term = 0.0, scale_term = 0.0;
  for (std::size_t k = 0; k < mu.size(); ++k) {
    if (!(sigma[k] > 0.0)) throw ContractViolation("bnn_kl: sigma must be > 0");
    mu_term += mu[k] * mu[k];
    const double r = sigma[k] * sigma[k] / s02;
    scale_term += r - std::log(r);
  }
  return mu_term / (2.0 * s02) + 0.5 * scale_term - 0.5 * static_cast<double>(mu.size());
}

/// Gaussian mean-field baseline: same loop as maxwent_fit with the KL to the
/// prior in place of the entropy term, both mean and scales trained, and the
/// best-validation parameters restored.
inline FitResult bnn_fit(const NetworkSpec& spec, const Dataset& train, const Dataset& val,
                         const TrainConfig& cfg) {
  cfg.validate();
  if (train.n() == 0 || val.n() == 0) throw ContractViolation("bnn_fit: empty train or val");
  const WeightLayout layout = WeightLayout::from_spec(spec);
  const std::size_t d = layout.total_dim();

  WeightDistribution dist;
  dist.kind = ParamKind::Scaling;
  dist.law = SampleLaw::StandardNormal;
  dist.layout = layout;
  dist.mean = glorot_init(layout, derive_seed(cfg.seed, 0));
  dist.raw.assign(d, cfg.u_init);

  MiniBatcher batcher(train, cfg.batch_size, derive_seed(cfg.seed, 2),
                      cfg.sample_with_replacement);
  RandomStream z_stream(derive_seed(cfg.seed, 3), dist.law);
  RandomStream val_z_stream(derive_seed(cfg.seed, 4), dist.law);
  std::vector<std::vector<double>> val_z(cfg.val_z_samples);
  for (auto& z : val_z) z = sample_z(val_z_stream, d);
  const Batch val_batch = as_batch(val);

  Adam adam_mean(d, cfg), adam_raw(d, cfg);
  std::vector<double> gmean(d), graw(d), z(d);
  const double s02 = cfg.bnn_prior_sigma * cfg.bnn_prior_sigma;
  const double kl_scale = cfg.lambda / static_cast<double>(train.n());

  FitResult result;
  std::vector<double> best_mean = dist.mean, best_raw = dist.raw;
  double best_val = kInf;
  double loss_acc = 0.0;
  std::size_t loss_count = 0;

  for (std::size_t t = 1; t <= cfg.maxwent_iters; ++t) {
    const Batch batch = batcher.next();
    std::fill(gmean.begin(), gmean.end(), 0.0);
    std::fill(graw.begin(), graw.end(), 0.0);
    double loss_mean = 0.0;
    for (std::size_t s = 0; s < cfg.mc_samples; ++s) {
      z_stream.fill(z.begin(), z.end());
      const std::vector<double> w = realize_weights(dist, z);
      LossGrad lg;
      try {
        lg = loss_and_grad(spec, layout, w, batch);
      } catch (const NumericalError& e) {
        throw NumericalError("bnn_fit: iteration " + std::to_string(t) + ": " + e.what());
      }
      const std::vector<double> gu = chain_grad_to_raw(dist, z, lg.grad);
      for (std::size_t k = 0; k < d; ++k) {
        gmean[k] += lg.grad[k];
        graw[k] += gu[k];
      }
      loss_mean += lg.loss;
    }
    const double inv_s = 1.0 / static_cast<double>(cfg.mc_samples);
    loss_mean *= inv_s;

    double kl = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double sig = softplus(dist.raw[k]);
      const double r = sig * sig / s02;
      kl += dist.mean[k] * dist.mean[k] / (2.0 * s02) + 0.5 * (r - std::log(r));
      gmean[k] = gmean[k] * inv_s + kl_scale * dist.mean[k] / s02;
      graw[k] = graw[k] * inv_s + kl_scale * (sig / s02 - 1.0 / sig) * sigmoid(dist.raw[k]);
    }
    kl -= 0.5 * static_cast<double>(d);
    const double objective = loss_mean + kl_scale * kl;
    if (!std::isfinite(objective))
      throw NumericalError("bnn_fit: non-finite objective at iteration " + std::to_string(t));

    adam_mean.step(dist.mean, gmean);
    adam_raw.step(dist.raw, graw);

    loss_acc += loss_mean;
    ++loss_count;
    if (t % cfg.val_check_every == 0 || t == cfg.maxwent_iters) {
      const double val_nll = predictive_val_nll(spec, layout, dist, val_z, val_batch);
      const bool improved = val_nll < best_val;
      if (improved) {
        best_val = val_nll;
        best_mean = dist.mean;
        best_raw = dist.raw;
        result.accepted_iteration = static_cast<std::int64_t>(t);
      }
      result.log.push_back({static_cast<std::int64_t>(t), loss_acc / loss_count, val_nll,
                            entropy_proxy(dist), improved});
      loss_acc = 0.0;
      loss_count = 0;
    }
  }

  result.final_state = dist;
  dist.mean = std::move(best_mean);
  dist.raw = std::move(best_raw);
  result.fitted = std::move(dist);
  return result;
}

/// Worker cap for fan-out helpers; MAXWENT_THREADS overrides.
inline std::size_t max_threads() {
  if (const char* env = std::getenv("MAXWENT_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<std::size_t>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

namespace detail {

template <typename Fn>
void parallel_for_index(std::size_t count, Fn&& fn) {
  const std::size_t workers = std::min(count, max_threads());
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  for (std::thread& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

/// m independent pretrains with seeds seed+j; members may run on separate
/// threads, results are joined by member index.
inline std::vector<PretrainResult> fit_deep_ensemble(const NetworkSpec& spec,
                                                     const Dataset& train, const Dataset& val,
                                                     const TrainConfig& cfg, std::size_t m) {
  if (m == 0) throw ContractViolation("fit_deep_ensemble: m must be >= 1");
  std::vector<PretrainResult> results(m);
  detail::parallel_for_index(m, [&](std::size_t j) {
    TrainConfig member_cfg = cfg;
    member_cfg.seed = cfg.seed + j;
    results[j] = pretrain(spec, train, val, member_cfg);
  });
  return results;
}

struct EnsembleFitResult {
  EnsembleDistribution dist;
  std::vector<FitResult> members;
};

/// Pretrain m centers, then run the entropy fit independently around each.
inline EnsembleFitResult fit_maxwent_ensemble(const NetworkSpec& spec, const Dataset& train,
                                              const Dataset& val, const TrainConfig& cfg,
                                              std::size_t m, ParamKind kind,
                                              SampleLaw law = SampleLaw::UniformSym) {
  const WeightLayout layout = WeightLayout::from_spec(spec);
  const std::vector<PretrainResult> centers = fit_deep_ensemble(spec, train, val, cfg, m);

  EnsembleFitResult out;
  out.members.resize(m);
  out.dist.members.resize(m);
  detail::parallel_for_index(m, [&](std::size_t j) {
    TrainConfig member_cfg = cfg;
    member_cfg.seed = cfg.seed + j;
    std::vector<Matrix> bases;
    if (kind == ParamKind::Svd)
      bases = build_svd_bases(spec, layout, centers[j].weights, train.X);
    const WeightDistribution init =
        make_distribution(layout, kind, law, centers[j].weights, member_cfg.u_init, bases);
    out.members[j] = maxwent_fit(init, spec, train, val, member_cfg);
    out.dist.members[j] = out.members[j].fitted;
  });
  return out;
}

}  // namespace maxwent

#endif  // MAXWENT_TRAINER_HPP_
