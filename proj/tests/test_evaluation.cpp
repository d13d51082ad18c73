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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "maxwent/evaluation.hpp"
#include "maxwent/trainer.hpp"

using namespace maxwent;

namespace {

PredictionSample regression_sample(std::vector<double> mu, std::vector<double> sigma) {
  PredictionSample s;
  s.classification = false;
  s.mu = std::move(mu);
  s.sigma = std::move(sigma);
  return s;
}

PredictionSample binary_sample(const std::vector<double>& probs_of_one) {
  PredictionSample s;
  s.classification = true;
  for (double h : probs_of_one) s.probs.push_back({1.0 - h, h});
  return s;
}

// brute-force all-pairs counting oracle
double auroc_pairs(const std::vector<double>& id, const std::vector<double>& ood) {
  double num = 0.0;
  for (double o : ood)
    for (double i : id) num += o > i ? 1.0 : (o == i ? 0.5 : 0.0);
  return num / (static_cast<double>(id.size()) * static_cast<double>(ood.size()));
}

// exhaustive threshold scan oracle: candidate thresholds are the scores
double fpr95_scan(const std::vector<double>& id, const std::vector<double>& ood) {
  const double m = static_cast<double>(ood.size());
  double best_threshold = -kInf;
  bool found = false;
  std::vector<double> candidates = ood;
  for (double t : candidates) {
    std::size_t tp = 0;
    for (double o : ood)
      if (o >= t) ++tp;
    if (static_cast<double>(tp) >= 0.95 * m && (!found || t > best_threshold)) {
      best_threshold = t;
      found = true;
    }
  }
  std::size_t fp = 0;
  for (double i : id)
    if (i >= best_threshold) ++fp;
  return static_cast<double>(fp) / static_cast<double>(id.size());
}

}  // namespace

TEST_CASE("degenerate distribution gives identical draws") {
  const auto [train, val] = gen_two_moons(30, 10, 0.1, 1);
  NetworkSpec spec = spec_for_task(train, {6});
  const WeightLayout layout = WeightLayout::from_spec(spec);
  WeightDistribution dist =
      make_deterministic(layout, glorot_init(layout, 3), SampleLaw::UniformSym);

  RandomStream stream(2, dist.law);
  const std::vector<PredictionSample> samples = predict_samples(dist, spec, train.X, 7, stream);
  for (const PredictionSample& s : samples) {
    REQUIRE(s.probs.size() == 7);
    for (std::size_t j = 1; j < 7; ++j) CHECK(s.probs[j] == s.probs[0]);
  }
}

TEST_CASE("prediction sampling is seed deterministic") {
  const auto [train, val] = gen_1d_regression(20, 5, 2);
  NetworkSpec spec = spec_for_task(train, {8});
  const WeightLayout layout = WeightLayout::from_spec(spec);
  const WeightDistribution dist = make_distribution(layout, ParamKind::Scaling,
                                                    SampleLaw::UniformSym,
                                                    glorot_init(layout, 5), -2.0);
  RandomStream s1(9, dist.law), s2(9, dist.law);
  const auto a = predict_samples(dist, spec, train.X, 11, s1);
  const auto b = predict_samples(dist, spec, train.X, 11, s2);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].mu == b[i].mu);
    CHECK(a[i].sigma == b[i].sigma);
  }
}

TEST_CASE("prediction means converge with the number of draws") {
  NetworkSpec spec;
  spec.input_dim = 2;
  spec.hidden = {4};
  spec.head = Head::GaussianRegression;
  const WeightLayout layout = WeightLayout::from_spec(spec);
  const WeightDistribution dist = make_distribution(layout, ParamKind::Scaling,
                                                    SampleLaw::UniformSym,
                                                    glorot_init(layout, 7), -1.0);
  Matrix x(1, 2);
  x(0, 0) = 0.3;
  x(0, 1) = -0.4;

  auto mean_mu = [&](std::size_t p, std::uint64_t seed) {
    RandomStream stream(seed, dist.law);
    const auto samples = predict_samples(dist, spec, x, p, stream);
    double acc = 0.0, acc2 = 0.0;
    for (double m : samples[0].mu) {
      acc += m;
      acc2 += m * m;
    }
    const double mean = acc / static_cast<double>(p);
    const double se =
        std::sqrt(std::max(acc2 / static_cast<double>(p) - mean * mean, 0.0) /
                  static_cast<double>(p));
    return std::make_pair(mean, se);
  };
  const auto [m4, se4] = mean_mu(10000, 31);
  const auto [m5, se5] = mean_mu(100000, 37);
  CHECK(std::fabs(m4 - m5) <= 3.0 * std::sqrt(se4 * se4 + se5 * se5));
}

TEST_CASE("classification uncertainty from averaged probabilities") {
  CHECK(uncertainty_classification(binary_sample({0.5, 0.5, 0.5})) ==
        doctest::Approx(std::log(2.0)));
  CHECK(uncertainty_classification(binary_sample({1.0, 1.0})) == doctest::Approx(0.0));
  // disagreement: average of 0 and 1 is 0.5, entropy of the mean (not mean entropy)
  CHECK(uncertainty_classification(binary_sample({0.0, 1.0})) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("classification uncertainty ignores draw order") {
  const std::vector<double> probs = {0.1, 0.7, 0.4, 0.9};
  std::vector<double> shuffled = {0.9, 0.1, 0.4, 0.7};
  CHECK(uncertainty_classification(binary_sample(probs)) ==
        doctest::Approx(uncertainty_classification(binary_sample(shuffled))).epsilon(1e-15));
}

TEST_CASE("regression uncertainty combines noise and disagreement") {
  CHECK(uncertainty_regression(regression_sample({0.3}, {0.7})) == doctest::Approx(0.49));
  CHECK(uncertainty_regression(regression_sample({-1.0, 1.0}, {1e-9, 1e-9})) ==
        doctest::Approx(1.0));

  RandomStream stream(12);
  std::vector<double> mu(50), sigma(50);
  for (std::size_t i = 0; i < 50; ++i) {
    mu[i] = stream.next_normal();
    sigma[i] = 0.1 + stream.next_unit();
  }
  // two-pass oracle: mean aleatoric variance plus variance of the means
  double mean_mu = 0.0;
  for (double m : mu) mean_mu += m;
  mean_mu /= 50.0;
  double expect = 0.0;
  for (std::size_t i = 0; i < 50; ++i)
    expect += sigma[i] * sigma[i] + (mu[i] - mean_mu) * (mu[i] - mean_mu);
  expect /= 50.0;
  const double got = uncertainty_regression(regression_sample(mu, sigma));
  CHECK(got == doctest::Approx(expect).epsilon(1e-12));

  double aleatoric = 0.0;
  for (double s : sigma) aleatoric += s * s;
  aleatoric /= 50.0;
  CHECK(got >= aleatoric * (1.0 - 1e-12));
}

TEST_CASE("ranking statistic basics") {
  CHECK(auroc({0.0, 0.0}, {1.0, 1.0}) == 1.0);
  CHECK(auroc({0.3, 0.7}, {0.3, 0.7}) == 0.5);
  CHECK_THROWS_AS(auroc({}, {1.0}), ContractViolation);
}

TEST_CASE("ranking statistic matches brute-force pair counting") {
  RandomStream stream(14);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> id(1 + stream.next_below(12)), ood(1 + stream.next_below(12));
    for (double& v : id) v = static_cast<double>(stream.next_below(6));
    for (double& v : ood) v = static_cast<double>(stream.next_below(6));
    CHECK(auroc(id, ood) == auroc_pairs(id, ood));
  }
}

TEST_CASE("swapping the score lists complements the statistic") {
  RandomStream stream(15);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> a(1 + stream.next_below(10)), b(1 + stream.next_below(10));
    for (double& v : a) v = stream.next_normal();
    for (double& v : b) v = static_cast<double>(stream.next_below(4)) * 0.25;
    CHECK(auroc(a, b) + auroc(b, a) == 1.0);
  }
}

TEST_CASE("false positive rate at high recall") {
  CHECK(fpr_at_95_tpr({0.0, 0.1}, {1.0, 1.1, 1.2}) == 0.0);
  const std::vector<double> same = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  CHECK(fpr_at_95_tpr(same, same) >= 0.90);
  CHECK_THROWS_AS(fpr_at_95_tpr({}, {1.0}), ContractViolation);
}

TEST_CASE("false positive rate matches the exhaustive threshold scan") {
  RandomStream stream(16);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> id(2 + stream.next_below(20)), ood(2 + stream.next_below(20));
    for (double& v : id) v = static_cast<double>(stream.next_below(8));
    for (double& v : ood) v = static_cast<double>(stream.next_below(8));
    CHECK(fpr_at_95_tpr(id, ood) == fpr95_scan(id, ood));
  }
}

TEST_CASE("decreasing an in-distribution score never raises the rate") {
  RandomStream stream(17);
  std::vector<double> id(20), ood(20);
  for (double& v : id) v = stream.next_normal();
  for (double& v : ood) v = 0.5 + stream.next_normal();
  const double before = fpr_at_95_tpr(id, ood);
  id[3] -= 2.0;
  CHECK(fpr_at_95_tpr(id, ood) <= before);
}

TEST_CASE("test likelihood reference values") {
  {
    const std::vector<PredictionSample> samples = {regression_sample({2.0}, {1.0})};
    CHECK(test_nll(samples, {2.0}) == doctest::Approx(0.5 * std::log(2.0 * M_PI)));
  }
  {
    const std::vector<PredictionSample> samples = {binary_sample({1.0}), binary_sample({0.0})};
    CHECK(test_nll(samples, {1.0, 0.0}) == doctest::Approx(0.0).epsilon(1e-9));
  }
  {
    RandomStream stream(18);
    std::vector<PredictionSample> samples;
    std::vector<double> y;
    for (int i = 0; i < 10; ++i) {
      std::vector<double> mu(5), sigma(5);
      for (std::size_t j = 0; j < 5; ++j) {
        mu[j] = stream.next_normal();
        sigma[j] = 0.2 + stream.next_unit();
      }
      samples.push_back(regression_sample(mu, sigma));
      y.push_back(stream.next_normal());
    }
    double expect = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      double mean_mu = 0.0;
      for (double m : samples[i].mu) mean_mu += m;
      mean_mu /= 5.0;
      double u = 0.0;
      for (std::size_t j = 0; j < 5; ++j)
        u += samples[i].sigma[j] * samples[i].sigma[j] + samples[i].mu[j] * samples[i].mu[j];
      u = u / 5.0 - mean_mu * mean_mu;
      expect += 0.5 * (std::log(2.0 * M_PI * u) + (y[i] - mean_mu) * (y[i] - mean_mu) / u);
    }
    expect /= static_cast<double>(samples.size());
    CHECK(test_nll(samples, y) == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("rank correlation of a reversed ordering is minus one") {
  const std::vector<double> a = {1.0, 2.0, 3.0, 4.0};
  const std::vector<double> b = {8.0, 6.0, 4.0, 2.0};
  CHECK(spearman(a, b) == doctest::Approx(-1.0));
  CHECK(spearman(a, a) == doctest::Approx(1.0));
  const std::vector<double> c = {1.0, 1.0, 1.0, 1.0};
  CHECK(spearman(a, c) == 0.0);
}

TEST_CASE("fitted linear scales invert the amplitude ordering") {
  // three features with clearly distinct amplitudes
  RandomStream stream(19);
  Dataset train;
  train.task = Task::Regression;
  train.X = Matrix(80, 3);
  train.y.resize(80);
  const std::vector<double> scale = {0.5, 1.0, 2.0};
  for (std::size_t i = 0; i < 80; ++i) {
    for (std::size_t j = 0; j < 3; ++j) train.X(i, j) = scale[j] * stream.next_normal();
    train.y[i] = train.X(i, 0) + 0.5 * train.X(i, 1) - train.X(i, 2) +
                 0.05 * stream.next_normal();
  }
  Dataset val = train;

  NetworkSpec spec;
  spec.input_dim = 3;
  spec.hidden = {};
  spec.head = Head::LinearRegression;
  spec.use_bias = false;
  const WeightLayout layout = WeightLayout::from_spec(spec);

  TrainConfig cfg;
  cfg.seed = 40;
  cfg.pretrain_iters = 2000;
  cfg.learning_rate = 0.01;
  const PretrainResult center = pretrain(spec, train, val, cfg);
  cfg.lambda = 3.0;
  cfg.maxwent_iters = 4000;
  cfg.mc_samples = 8;
  cfg.batch_size = train.n();
  const WeightDistribution init = make_distribution(layout, ParamKind::Scaling,
                                                    SampleLaw::UniformSym, center.weights,
                                                    cfg.u_init);
  const FitResult fit = maxwent_fit(init, spec, train, val, cfg);

  const AmplitudeDiagnostic diag = amplitude_diagnostic(fit.final_state, spec, train.X);
  REQUIRE(diag.layers.size() == 1);
  // amplitudes ascend with the feature scales, scale parameters descend
  CHECK(diag.layers[0].amplitude2[0] < diag.layers[0].amplitude2[1]);
  CHECK(diag.layers[0].amplitude2[1] < diag.layers[0].amplitude2[2]);
  CHECK(diag.layers[0].mean_phi2[0] > diag.layers[0].mean_phi2[1]);
  CHECK(diag.layers[0].mean_phi2[1] > diag.layers[0].mean_phi2[2]);
  CHECK(diag.layers[0].spearman == doctest::Approx(-1.0));
}

TEST_CASE("a silent neuron shows a null amplitude in the diagnostic") {
  const auto [train, val] = gen_two_moons(40, 10, 0.1, 21);
  NetworkSpec spec = spec_for_task(train, {5});
  const WeightLayout layout = WeightLayout::from_spec(spec);
  std::vector<double> w = glorot_init(layout, 22);
  // silence hidden neuron 2: zero incoming weights, strongly negative bias
  for (std::size_t k = 0; k < 2; ++k) w[layout.weight_index(0, k, 2)] = 0.0;
  w[layout.bias_index(0, 2)] = -5.0;

  WeightDistribution dist =
      make_distribution(layout, ParamKind::Scaling, SampleLaw::UniformSym, w, -40.0);
  const AmplitudeDiagnostic diag = amplitude_diagnostic(dist, spec, train.X);
  REQUIRE(diag.layers.size() == 2);
  CHECK(diag.layers[1].amplitude2[2] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("clip level zero reproduces deterministic scores and clipping widens them") {
  const auto [raw_train, raw_val] = gen_1d_regression(60, 15, 23);
  Dataset train = raw_train, val = raw_val;
  standardize_fit_apply(train, {&val});

  NetworkSpec spec = spec_for_task(train, {16, 16});
  const WeightLayout layout = WeightLayout::from_spec(spec);
  TrainConfig cfg;
  cfg.seed = 24;
  cfg.pretrain_iters = 1500;
  const PretrainResult center = pretrain(spec, train, val, cfg);
  cfg.maxwent_iters = 1500;
  const WeightDistribution init = make_distribution(layout, ParamKind::Scaling,
                                                    SampleLaw::UniformSym, center.weights,
                                                    cfg.u_init);
  const FitResult fit = maxwent_fit(init, spec, train, val, cfg);

  Matrix grid(40, 1);
  for (std::size_t i = 0; i < 40; ++i) grid(i, 0) = -2.0 + 4.0 * static_cast<double>(i) / 39.0;

  auto mean_uncertainty = [&](double clip) {
    WeightDistribution clipped = fit.fitted;
    clipped.clip = clip;
    RandomStream stream(77, clipped.law);
    const auto samples = predict_samples(clipped, spec, grid, 30, stream);
    double acc = 0.0;
    for (const auto& s : samples) acc += uncertainty_regression(s);
    return acc / static_cast<double>(samples.size());
  };

  double previous = mean_uncertainty(0.0);
  const std::vector<double> w0 = realize_weights([&] {
    WeightDistribution d = fit.fitted;
    d.clip = 0.0;
    return d;
  }(), std::vector<double>(fit.fitted.dim(), 0.5));
  CHECK(w0 == fit.fitted.mean);

  for (double clip : {0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, kInf}) {
    const double current = mean_uncertainty(clip);
    CHECK(current >= previous - 1e-12);
    previous = current;
  }
}

TEST_CASE("end-to-end scoring is deterministic") {
  const auto [train, val] = gen_two_moons(50, 10, 0.1, 25);
  NetworkSpec spec = spec_for_task(train, {8});
  const WeightLayout layout = WeightLayout::from_spec(spec);
  const WeightDistribution dist = make_distribution(layout, ParamKind::Scaling,
                                                    SampleLaw::UniformSym,
                                                    glorot_init(layout, 26), -2.0);
  const Dataset ring = gen_ring(60, 3.0, 27);
  const OodEvaluation a = evaluate_ood(dist, spec, val, ring, 9, 3);
  const OodEvaluation b = evaluate_ood(dist, spec, val, ring, 9, 3);
  CHECK(a.scores_id == b.scores_id);
  CHECK(a.scores_ood == b.scores_ood);
  CHECK(a.auroc_value == b.auroc_value);
  CHECK(a.fpr95 == b.fpr95);
  CHECK(a.nll == b.nll);
}
