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

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "maxwent/maxwent.hpp"

namespace {

using namespace maxwent;

// ---------------------------------------------------------------------------
// shared options and data pipeline
// ---------------------------------------------------------------------------

struct DataOptions {
  std::string dataset = "two-moons";  // two-moons | reg-1d | path to CSV
  std::string target;                 // CSV target column
  std::string split = "extrapolation";
  std::uint64_t seed = 0;
  std::size_t n_train = 0;  // 0 = generator default
  std::size_t n_val = 0;
  double noise = 0.1;
  double train_fraction = 0.8;
  std::size_t ood_points = 500;
  double ood_radius = 3.0;
};

bool is_generator(const std::string& name) {
  return name == "two-moons" || name == "reg-1d";
}

struct PipelineData {
  Dataset train, val;    // standardized, training statistics
  Dataset id_eval, ood;  // standardized with the same statistics
  Standardizer standardizer;
  std::string dataset_name, split_name;
  DataManifest manifest;
};

Dataset concat_rows(const Dataset& a, const Dataset& b) {
  Dataset out = a;
  out.X = Matrix(a.n() + b.n(), a.features());
  out.y.resize(a.n() + b.n());
  for (std::size_t i = 0; i < a.n(); ++i) {
    for (std::size_t j = 0; j < a.features(); ++j) out.X(i, j) = a.X(i, j);
    out.y[i] = a.y[i];
  }
  for (std::size_t i = 0; i < b.n(); ++i) {
    for (std::size_t j = 0; j < b.features(); ++j) out.X(a.n() + i, j) = b.X(i, j);
    out.y[a.n() + i] = b.y[i];
  }
  return out;
}

// out-of-distribution fixture for the 1D regression task: two bands beyond
// the training support
Dataset gen_1d_bands(std::size_t n, std::uint64_t seed) {
  RandomStream stream(seed);
  Dataset ds;
  ds.task = Task::Regression;
  ds.X = Matrix(n, 1);
  ds.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = stream.next_unit();
    const double x = i % 2 == 0 ? -2.0 + 0.8 * u : 1.4 + 0.6 * u;
    ds.X(i, 0) = x;
    ds.y[i] = regression_truth(x);
  }
  return ds;
}

PipelineData prepare_data(const DataOptions& opt) {
  PipelineData data;
  data.dataset_name = opt.dataset;
  data.manifest.seed = opt.seed;

  if (opt.dataset == "two-moons") {
    const std::size_t n_train = opt.n_train == 0 ? 200 : opt.n_train;
    const std::size_t n_val = opt.n_val == 0 ? 50 : opt.n_val;
    auto [train, val] = gen_two_moons(n_train, n_val, opt.noise, opt.seed);
    data.ood = gen_ring(opt.ood_points, opt.ood_radius, derive_seed(opt.seed, 50));
    data.id_eval = concat_rows(train, val);
    data.train = std::move(train);
    data.val = std::move(val);
    data.split_name = "ring-ood";
    data.manifest.source = "two-moons";
    data.manifest.split = data.split_name;
    data.manifest.ood_fixture = std::to_string(opt.ood_points) +
                                " points uniform on the circle of radius " +
                                format_double(opt.ood_radius);
  } else if (opt.dataset == "reg-1d") {
    const std::size_t n_train = opt.n_train == 0 ? 100 : opt.n_train;
    const std::size_t n_val = opt.n_val == 0 ? 20 : opt.n_val;
    auto [train, val] = gen_1d_regression(n_train, n_val, opt.seed);
    data.ood = gen_1d_bands(opt.ood_points, derive_seed(opt.seed, 51));
    data.id_eval = concat_rows(train, val);
    data.train = std::move(train);
    data.val = std::move(val);
    data.split_name = "band-ood";
    data.manifest.source = "reg-1d";
    data.manifest.split = data.split_name;
    data.manifest.ood_fixture = std::to_string(opt.ood_points) +
                                " points uniform on [-2,-1.2] and [1.4,2]";
  } else {
    if (opt.target.empty())
      throw ContractViolation("CSV datasets need --target");
    if (!std::filesystem::exists(opt.dataset))
      throw IoError("dataset file '" + opt.dataset + "' does not exist");
    const Dataset full = load_csv(opt.dataset, opt.target);
    SplitMode mode;
    if (opt.split == "extrapolation")
      mode = SplitMode::Extrapolation;
    else if (opt.split == "interpolation")
      mode = SplitMode::Interpolation;
    else
      throw ContractViolation("--split must be extrapolation or interpolation");
    auto [id_part, ood_part] = pca_split(full, mode);
    auto [train, val] = random_split(id_part, opt.train_fraction, derive_seed(opt.seed, 52));
    data.ood = std::move(ood_part);
    data.id_eval = val;
    data.train = std::move(train);
    data.val = std::move(val);
    data.split_name = opt.split;
    data.dataset_name = std::filesystem::path(opt.dataset).stem().string();
    data.manifest.source = opt.dataset;
    data.manifest.target_column = opt.target;
    data.manifest.split = opt.split;
  }

  data.standardizer = standardize_fit(data.train);
  data.train = standardize_apply(data.standardizer, data.train);
  data.val = standardize_apply(data.standardizer, data.val);
  data.id_eval = standardize_apply(data.standardizer, data.id_eval);
  data.ood = standardize_apply(data.standardizer, data.ood);
  return data;
}

// ---------------------------------------------------------------------------
// methods
// ---------------------------------------------------------------------------

enum class Method { Vanilla, DeepEnsemble, Bnn, MaxWEnt, MaxWEntSvd };

Method method_from(const std::string& name) {
  if (name == "vanilla") return Method::Vanilla;
  if (name == "deep-ensemble") return Method::DeepEnsemble;
  if (name == "bnn") return Method::Bnn;
  if (name == "maxwent") return Method::MaxWEnt;
  if (name == "maxwent-svd") return Method::MaxWEntSvd;
  throw ContractViolation("unknown method '" + name +
                          "' (expected vanilla, deep-ensemble, bnn, maxwent, maxwent-svd)");
}

std::string method_name(Method m) {
  switch (m) {
    case Method::Vanilla: return "vanilla";
    case Method::DeepEnsemble: return "deep-ensemble";
    case Method::Bnn: return "bnn";
    case Method::MaxWEnt: return "maxwent";
    case Method::MaxWEntSvd: return "maxwent-svd";
  }
  return "";
}

std::string derive_method_name(const CheckpointFile& file) {
  const bool stochastic = file.members.front().dist.stochastic();
  const bool svd = file.members.front().dist.kind == ParamKind::Svd;
  const bool normal = file.members.front().dist.law == SampleLaw::StandardNormal;
  std::string base;
  if (!stochastic)
    base = file.is_ensemble() ? "deep-ensemble" : "vanilla";
  else if (svd)
    base = "maxwent-svd";
  else if (normal)
    base = "bnn";
  else
    base = "maxwent";
  if (file.is_ensemble() && stochastic) base += "-x" + std::to_string(file.members.size());
  return base;
}

struct TrainOptions {
  std::string method = "maxwent";
  std::size_t m = 1;
  double lambda = std::numeric_limits<double>::quiet_NaN();  // NaN = method default
  double learning_rate = 1e-3;
  std::size_t batch = 0;  // 0 = task default (32 synthetic, 128 tabular)
  std::size_t pretrain_iters = 10000;
  std::size_t iters = 0;  // 0 = task default (20k synthetic, 50k tabular)
  std::size_t mc_samples = 1;
  double u_init = std::numeric_limits<double>::quiet_NaN();  // NaN = kind default
  std::string law = "uniform";
  std::string policy = "auto";  // accepted | final | auto (accepted for CSV data)
  std::vector<std::size_t> hidden = {100, 100, 100};
};

// The tau-gated checkpoint is the tabular protocol; the synthetic generators
// produce separable toys whose pretrained validation loss is ~0, which
// degenerates tau, so their fits keep the end-of-run scales.
bool use_accepted_state(const TrainOptions& opt, bool tabular) {
  if (opt.policy == "accepted") return true;
  if (opt.policy == "final") return false;
  if (opt.policy == "auto") return tabular;
  throw ContractViolation("--checkpoint-policy must be accepted, final or auto");
}

TrainConfig build_config(const TrainOptions& opt, const DataOptions& data_opt, Method method,
                         bool tabular) {
  TrainConfig cfg;
  cfg.seed = data_opt.seed;
  cfg.learning_rate = opt.learning_rate;
  cfg.batch_size = opt.batch != 0 ? opt.batch : (tabular ? 128 : 32);
  cfg.pretrain_iters = opt.pretrain_iters;
  cfg.maxwent_iters = opt.iters != 0 ? opt.iters : (tabular ? 50000 : 20000);
  cfg.mc_samples = opt.mc_samples;
  if (std::isnan(opt.lambda))
    cfg.lambda = method == Method::Bnn ? 1.0 : 10.0;
  else
    cfg.lambda = opt.lambda;
  const ParamKind kind = method == Method::MaxWEntSvd ? ParamKind::Svd : ParamKind::Scaling;
  cfg.u_init = std::isnan(opt.u_init) ? default_u_init(kind) : opt.u_init;
  return cfg;
}

SampleLaw law_from_option(const std::string& name) {
  if (name == "uniform") return SampleLaw::UniformSym;
  if (name == "normal") return SampleLaw::StandardNormal;
  throw ContractViolation("--law must be uniform or normal");
}

// Train one method on prepared data; returns the checkpoint plus the log of
// the first trained member.
struct TrainOutput {
  CheckpointFile checkpoint;
  std::vector<TrainLogRow> log;
};

TrainOutput run_training(Method method, const PipelineData& data, const NetworkSpec& spec,
                         const TrainConfig& cfg, std::size_t m, SampleLaw law,
                         const std::vector<double>* pretrained_mean, bool accepted_state) {
  const WeightLayout layout = WeightLayout::from_spec(spec);
  TrainOutput out;

  auto pretrain_mean = [&]() {
    if (pretrained_mean != nullptr) return *pretrained_mean;
    PretrainResult r = pretrain(spec, data.train, data.val, cfg);
    if (out.log.empty()) out.log = r.log;
    return r.weights;
  };

  switch (method) {
    case Method::Vanilla: {
      Checkpoint ckpt;
      ckpt.spec = spec;
      ckpt.dist = make_deterministic(layout, pretrain_mean(), law);
      out.checkpoint.members.push_back(std::move(ckpt));
      break;
    }
    case Method::DeepEnsemble: {
      const std::vector<PretrainResult> members =
          fit_deep_ensemble(spec, data.train, data.val, cfg, m);
      out.log = members.front().log;
      for (const PretrainResult& r : members) {
        Checkpoint ckpt;
        ckpt.spec = spec;
        ckpt.dist = make_deterministic(layout, r.weights, law);
        out.checkpoint.members.push_back(std::move(ckpt));
      }
      break;
    }
    case Method::Bnn: {
      for (std::size_t j = 0; j < m; ++j) {
        TrainConfig member_cfg = cfg;
        member_cfg.seed = cfg.seed + j;
        const FitResult fit = bnn_fit(spec, data.train, data.val, member_cfg);
        if (j == 0) out.log = fit.log;
        Checkpoint ckpt;
        ckpt.spec = spec;
        ckpt.dist = fit.fitted;
        ckpt.accepted_iteration = fit.accepted_iteration;
        out.checkpoint.members.push_back(std::move(ckpt));
      }
      break;
    }
    case Method::MaxWEnt:
    case Method::MaxWEntSvd: {
      const ParamKind kind =
          method == Method::MaxWEntSvd ? ParamKind::Svd : ParamKind::Scaling;
      if (m > 1) {
        if (pretrained_mean != nullptr)
          throw ContractViolation(
              "--in applies to single-model fits; ensembles pretrain one center per member");
        const EnsembleFitResult ens =
            fit_maxwent_ensemble(spec, data.train, data.val, cfg, m, kind, law);
        out.log = ens.members.front().log;
        for (const FitResult& fit : ens.members) {
          Checkpoint ckpt;
          ckpt.spec = spec;
          ckpt.dist = accepted_state ? fit.fitted : fit.final_state;
          ckpt.tau = fit.tau;
          ckpt.accepted_iteration = fit.accepted_iteration;
          out.checkpoint.members.push_back(std::move(ckpt));
        }
        break;
      }
      const std::vector<double> mean = pretrain_mean();
      std::vector<Matrix> bases;
      if (kind == ParamKind::Svd) bases = build_svd_bases(spec, layout, mean, data.train.X);
      const WeightDistribution init =
          make_distribution(layout, kind, law, mean, cfg.u_init, bases);
      const FitResult fit = maxwent_fit(init, spec, data.train, data.val, cfg);
      out.log = fit.log;
      Checkpoint ckpt;
      ckpt.spec = spec;
      ckpt.dist = accepted_state ? fit.fitted : fit.final_state;
      ckpt.tau = fit.tau;
      ckpt.accepted_iteration = fit.accepted_iteration;
      out.checkpoint.members.push_back(std::move(ckpt));
      break;
    }
  }
  return out;
}

OodEvaluation evaluate_scores(const CheckpointFile& file, const PipelineData& data,
                              std::size_t p, std::uint64_t seed, double clip) {
  CheckpointFile working = file;
  if (clip >= 0.0)
    for (Checkpoint& c : working.members) c.dist.clip = clip;
  const NetworkSpec& spec = working.members.front().spec;
  if (working.is_ensemble())
    return evaluate_ood(working.ensemble(), spec, data.id_eval, data.ood, p, seed);
  return evaluate_ood(working.single().dist, spec, data.id_eval, data.ood, p, seed);
}

EvalReport make_report(const CheckpointFile& file, const PipelineData& data,
                       const OodEvaluation& eval, std::size_t p, std::uint64_t seed,
                       double clip, const std::string& method_label) {
  EvalReport report;
  report.method = method_label.empty() ? derive_method_name(file) : method_label;
  report.dataset = data.dataset_name;
  report.split = data.split_name;
  report.auroc = eval.auroc_value;
  report.fpr95 = eval.fpr95;
  report.test_nll = eval.nll;
  report.p = p;
  report.n_id = data.id_eval.n();
  report.n_ood = data.ood.n();
  report.seed = seed;
  report.clip = clip >= 0.0 ? clip : kInf;
  return report;
}

// ---------------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------------

int cmd_pretrain(const DataOptions& data_opt, const TrainOptions& train_opt,
                 const std::string& out_path, const std::string& log_path) {
  const PipelineData data = prepare_data(data_opt);
  NetworkSpec spec = spec_for_task(data.train, train_opt.hidden);
  const TrainConfig cfg =
      build_config(train_opt, data_opt, Method::Vanilla, !is_generator(data_opt.dataset));
  const TrainOutput out = run_training(Method::Vanilla, data, spec, cfg, 1,
                                       law_from_option(train_opt.law), nullptr, true);
  save_checkpoint(out_path, out.checkpoint);
  if (!log_path.empty()) write_training_log(log_path, out.log);
  return 0;
}

int cmd_train(const DataOptions& data_opt, const TrainOptions& train_opt,
              const std::string& in_path, const std::string& out_path,
              const std::string& log_path) {
  const Method method = method_from(train_opt.method);
  const PipelineData data = prepare_data(data_opt);
  const bool tabular = !is_generator(data_opt.dataset);

  NetworkSpec spec;
  std::vector<double> mean;
  const std::vector<double>* mean_ptr = nullptr;
  if (!in_path.empty()) {
    const CheckpointFile in_file = load_checkpoint(in_path);
    const Checkpoint& base = in_file.single();
    spec = base.spec;
    if (spec.input_dim != data.train.features())
      throw ContractViolation("checkpoint input dimension does not match the dataset");
    mean = base.dist.mean;
    mean_ptr = &mean;
  } else {
    spec = spec_for_task(data.train, train_opt.hidden);
  }

  const TrainConfig cfg = build_config(train_opt, data_opt, method, tabular);
  const TrainOutput out = run_training(method, data, spec, cfg, train_opt.m,
                                       law_from_option(train_opt.law), mean_ptr,
                                       use_accepted_state(train_opt, tabular));
  save_checkpoint(out_path, out.checkpoint);
  if (!log_path.empty()) write_training_log(log_path, out.log);
  return 0;
}

int cmd_eval(const DataOptions& data_opt, const std::string& in_path,
             const std::string& out_path, const std::string& scores_path,
             const std::string& manifest_path, std::size_t p, double clip,
             const std::string& method_label) {
  const CheckpointFile file = load_checkpoint(in_path);
  const PipelineData data = prepare_data(data_opt);
  const OodEvaluation eval = evaluate_scores(file, data, p, data_opt.seed, clip);
  const EvalReport report = make_report(file, data, eval, p, data_opt.seed, clip, method_label);
  write_eval_report(out_path, report);
  if (!scores_path.empty()) write_scores_csv(scores_path, eval.scores_id, eval.scores_ood);
  if (!manifest_path.empty()) write_manifest(manifest_path, data.manifest);
  return 0;
}

int cmd_clip_sweep(const DataOptions& data_opt, const std::string& in_path,
                   const std::string& out_path, std::size_t p) {
  const CheckpointFile file = load_checkpoint(in_path);
  const PipelineData data = prepare_data(data_opt);
  const std::vector<double> levels = {kInf, 10.0, 5.0, 2.0, 1.0, 0.5, 0.2, 0.1, 0.0};

  std::string csv = "clip,mean_uncertainty_id,mean_uncertainty_ood,auroc\n";
  for (double c : levels) {
    const OodEvaluation eval = evaluate_scores(file, data, p, data_opt.seed, c);
    double mean_id = 0.0, mean_ood = 0.0;
    for (double s : eval.scores_id) mean_id += s;
    for (double s : eval.scores_ood) mean_ood += s;
    mean_id /= static_cast<double>(eval.scores_id.size());
    mean_ood /= static_cast<double>(eval.scores_ood.size());
    csv += (c == kInf ? std::string("inf") : format_double(c)) + "," + format_double(mean_id) +
           "," + format_double(mean_ood) + "," + format_double(eval.auroc_value) + "\n";
  }
  atomic_write_text(out_path, csv);
  return 0;
}

int cmd_benchmark(const DataOptions& data_opt, const TrainOptions& train_opt,
                  const std::string& out_dir, const std::string& methods_arg,
                  const std::string& splits_arg, std::size_t p) {
  if (is_generator(data_opt.dataset))
    throw ContractViolation("benchmark expects a CSV dataset (--data)");
  std::filesystem::create_directories(out_dir);

  std::vector<std::string> methods;
  {
    std::stringstream ss(methods_arg);
    std::string item;
    while (std::getline(ss, item, ',')) methods.push_back(item);
  }
  std::vector<std::string> splits;
  {
    std::stringstream ss(splits_arg);
    std::string item;
    while (std::getline(ss, item, ',')) splits.push_back(item);
  }
  for (const std::string& m : methods) method_from(m);  // validate early

  struct Job {
    std::string split, method;
    EvalReport report;
    std::string error;
    std::vector<double> scores_id, scores_ood;
  };
  std::vector<Job> jobs;
  for (const std::string& split : splits)
    for (const std::string& method : methods) jobs.push_back({split, method, {}, {}, {}, {}});

  detail::parallel_for_index(jobs.size(), [&](std::size_t idx) {
    Job& job = jobs[idx];
    try {
      DataOptions local = data_opt;
      local.split = job.split;
      const PipelineData data = prepare_data(local);
      const Method method = method_from(job.method);
      NetworkSpec spec = spec_for_task(data.train, train_opt.hidden);
      const TrainConfig cfg = build_config(train_opt, local, method, true);
      const std::size_t m =
          (method == Method::DeepEnsemble || train_opt.m > 1) ? std::max<std::size_t>(train_opt.m, 1)
                                                              : 1;
      const TrainOutput out = run_training(method, data, spec, cfg, m,
                                           law_from_option(train_opt.law), nullptr,
                                           use_accepted_state(train_opt, true));
      const OodEvaluation eval = evaluate_scores(out.checkpoint, data, p, data_opt.seed, -1.0);
      job.report = make_report(out.checkpoint, data, eval, p, data_opt.seed, -1.0, job.method);
      job.scores_id = eval.scores_id;
      job.scores_ood = eval.scores_ood;
    } catch (const std::exception& e) {
      job.error = e.what();
    }
  });

  const std::string dataset_name = std::filesystem::path(data_opt.dataset).stem().string();
  std::string summary = "dataset,split,method,auroc,fpr95,test_nll,status\n";
  std::size_t failures = 0;
  for (const Job& job : jobs) {
    if (job.error.empty()) {
      const std::string base =
          (std::filesystem::path(out_dir) / (dataset_name + "_" + job.split + "_" + job.method))
              .string();
      write_eval_report(base + ".report.json", job.report);
      write_scores_csv(base + ".scores.csv", job.scores_id, job.scores_ood);
      summary += dataset_name + "," + job.split + "," + job.method + "," +
                 format_double(job.report.auroc) + "," + format_double(job.report.fpr95) + "," +
                 format_double(job.report.test_nll) + ",ok\n";
    } else {
      ++failures;
      std::string reason = job.error;
      std::replace(reason.begin(), reason.end(), ',', ';');
      std::replace(reason.begin(), reason.end(), '\n', ' ');
      summary += dataset_name + "," + job.split + "," + job.method + ",,,,error: " + reason + "\n";
    }
  }
  atomic_write_text((std::filesystem::path(out_dir) / "summary.csv").string(), summary);

  DataManifest manifest;
  manifest.source = data_opt.dataset;
  manifest.target_column = data_opt.target;
  manifest.split = splits_arg;
  manifest.seed = data_opt.seed;
  write_manifest((std::filesystem::path(out_dir) / "manifest.json").string(), manifest);

  if (failures == jobs.size() && !jobs.empty()) {
    std::cerr << "benchmark: every method failed\n";
    return 3;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// verify: closed-form and entropy cross-checks
// ---------------------------------------------------------------------------

LinearInstance verify_instance(std::size_t n, std::size_t b, double lambda,
                               RandomStream& stream) {
  Matrix x(n, b);
  for (std::size_t j = 0; j < b; ++j) {
    const double scale = 0.5 + 1.5 * stream.next_unit();
    for (std::size_t i = 0; i < n; ++i) x(i, j) = scale * stream.next_normal();
  }
  std::vector<double> w(b);
  for (double& v : w) v = stream.next_normal();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double pred = 0.0;
    for (std::size_t j = 0; j < b; ++j) pred += x(i, j) * w[j];
    y[i] = pred + 0.1 * stream.next_normal();
  }
  return make_linear_instance(std::move(x), std::move(y), lambda);
}

int cmd_verify(bool inject_lambda_mismatch) {
  struct Check {
    std::string name;
    double measured;
    double bound;
    bool pass;
  };
  std::vector<Check> checks;
  auto record = [&](const std::string& name, double measured, double bound) {
    checks.push_back({name, measured, bound, measured <= bound});
  };

  RandomStream stream(20260801);

  // closed forms against gradient descent on the exact objective
  double worst_scaling = 0.0, worst_svd = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const double lambda = rep % 2 == 0 ? 1.0 : 10.0;
    LinearInstance inst = verify_instance(200, 8, lambda, stream);
    const GdSolution gd_s = gd_solve_linear(inst, ParamKind::Scaling);
    const GdSolution gd_v = gd_solve_linear(inst, ParamKind::Svd);
    LinearInstance shifted = inst;
    if (inject_lambda_mismatch) shifted.lambda *= 1.5;
    const ClosedForm cf_s = closed_form_scaling(shifted);
    const ClosedForm cf_v = closed_form_svd(inst);
    for (std::size_t k = 0; k < 8; ++k) {
      worst_scaling =
          std::max(worst_scaling, std::fabs(gd_s.phi2[k] - cf_s.phi2[k]) / cf_s.phi2[k]);
      worst_svd = std::max(worst_svd, std::fabs(gd_v.phi2[k] - cf_v.phi2[k]) / cf_v.phi2[k]);
    }
  }
  record("scaling closed form vs gradient descent (max rel err)", worst_scaling, 1e-4);
  record("eigenbasis closed form vs gradient descent (max rel err)", worst_svd, 1e-4);

  // risk equality and entropy ordering at the optima
  double worst_risk = 0.0, worst_order = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    LinearInstance inst = verify_instance(120, 6, 0.5 + 2.0 * stream.next_unit(), stream);
    const ParamComparison cmp = prop_comparison(inst);
    const double expected = inst.lambda * 6.0 + inst.residual;
    worst_risk = std::max(worst_risk, std::fabs(cmp.risk_scaling - expected));
    worst_risk = std::max(worst_risk, std::fabs(cmp.risk_svd - expected));
    worst_order = std::max(worst_order, cmp.entropy_scaling - cmp.entropy_svd);
  }
  record("optimal risks equal lambda*b + residual (max abs err)", worst_risk, 1e-10);
  record("eigenbasis entropy never below scaling entropy (max violation)", worst_order, 1e-9);

  {
    Matrix x(100, 2);
    RandomStream dup(7);
    for (std::size_t i = 0; i < 100; ++i) {
      x(i, 0) = dup.next_normal();
      x(i, 1) = x(i, 0) + 1e-4 * dup.next_normal();
    }
    const LinearInstance inst = make_linear_instance(x, std::vector<double>(100, 0.0), 1.0);
    const ParamComparison cmp = prop_comparison(inst);
    record("correlated-column entropy gap exceeds 1 (measured as 1 - gap)",
           1.0 - (cmp.entropy_svd - cmp.entropy_scaling), 0.0);
  }

  // exact entropy versus the affine image of the proxy
  {
    double worst = 0.0;
    for (std::size_t d : {1u, 2u, 3u}) {
      NetworkSpec spec;
      spec.input_dim = d;
      spec.hidden = {};
      spec.head = Head::LinearRegression;
      spec.use_bias = false;
      const WeightLayout layout = WeightLayout::from_spec(spec);
      for (SampleLaw law : {SampleLaw::StandardNormal, SampleLaw::UniformSym}) {
        WeightDistribution dist = make_distribution(layout, ParamKind::Scaling, law,
                                                    std::vector<double>(d, 0.0), 0.0);
        for (double& u : dist.raw) u = -1.0 + 2.0 * stream.next_unit();
        const double exact = exact_entropy_smalld(dist);
        const double affine = static_cast<double>(d) * law_entropy_constant(law) +
                              0.5 * static_cast<double>(d) * entropy_proxy(dist);
        worst = std::max(worst, std::fabs(exact - affine));
      }
    }
    record("exact entropy matches the proxy affinely (max abs err)", worst, 1e-12);
  }

  // Hadamard: log eigenvalues dominated by log amplitudes
  {
    double worst = -kInf;
    for (int rep = 0; rep < 10; ++rep) {
      const LinearInstance inst = verify_instance(80, 5, 1.0, stream);
      double log_s = 0.0, log_a = 0.0;
      for (std::size_t k = 0; k < 5; ++k) {
        log_s += std::log(inst.eig.values[k]);
        log_a += std::log(inst.amp2[k]);
      }
      worst = std::max(worst, log_s - log_a);
    }
    record("log-spectrum bounded by log-amplitudes (max violation)", worst, 1e-10);
  }

  // Monte Carlo convergence of the average risk
  {
    const LinearInstance inst = verify_instance(50, 4, 2.0, stream);
    const ClosedForm cf = closed_form_scaling(inst);
    const double exact = exact_expected_risk(inst, cf.phi2, ParamKind::Scaling);
    double worst = 0.0;
    for (std::size_t m : {1000u, 10000u, 100000u}) {
      RandomStream mc(99, SampleLaw::UniformSym);
      const auto [mean, se] = mc_expected_risk(inst, cf.phi2, ParamKind::Scaling, m, mc);
      worst = std::max(worst, std::fabs(mean - exact) - 3.0 * se);
    }
    record("monte carlo risk within 3 standard errors (max excess)", worst, 0.0);
  }

  bool all_pass = true;
  for (const Check& c : checks) {
    all_pass = all_pass && c.pass;
    std::printf("[%s] %s: measured %.3e (bound %.3e)\n", c.pass ? " ok " : "FAIL",
                c.name.c_str(), c.measured, c.bound);
  }
  std::printf("%zu/%zu checks passed\n",
              static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(),
                                                     [](const Check& c) { return c.pass; })),
              checks.size());
  return all_pass ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"maxwent: stochastic neural networks with maximum-entropy weight distributions "
               "for epistemic uncertainty and out-of-distribution detection"};
  app.require_subcommand(1);

  DataOptions data_opt;
  TrainOptions train_opt;
  std::string in_path, out_path, log_path, scores_path, manifest_path, method_label;
  std::string methods_arg = "vanilla,deep-ensemble,bnn,maxwent,maxwent-svd";
  std::string splits_arg = "extrapolation,interpolation";
  std::size_t p = 50;
  double clip = -1.0;
  bool inject = false;
  std::string hidden_arg = "100,100,100";

  auto add_data_options = [&](CLI::App* cmd, bool csv_only) {
    if (csv_only)
      cmd->add_option("--data", data_opt.dataset, "CSV dataset path")->required();
    else
      cmd->add_option("--dataset", data_opt.dataset,
                      "two-moons, reg-1d, or a CSV path (requires --target)");
    cmd->add_option("--target", data_opt.target, "target column for CSV datasets");
    cmd->add_option("--seed", data_opt.seed, "seed for data generation and training");
    cmd->add_option("--n-train", data_opt.n_train, "generator: training points");
    cmd->add_option("--n-val", data_opt.n_val, "generator: validation points");
    cmd->add_option("--noise", data_opt.noise, "two-moons noise level");
    cmd->add_option("--train-fraction", data_opt.train_fraction,
                    "CSV: train fraction inside the in-distribution part");
    cmd->add_option("--ood-n", data_opt.ood_points, "synthetic OOD fixture size");
    cmd->add_option("--ood-radius", data_opt.ood_radius, "two-moons OOD ring radius");
    if (!csv_only)
      cmd->add_option("--split", data_opt.split, "CSV split: extrapolation or interpolation");
  };
  auto add_train_options = [&](CLI::App* cmd) {
    cmd->add_option("--lambda", train_opt.lambda,
                    "entropy/divergence trade-off (default 10, bnn 1)");
    cmd->add_option("--lr", train_opt.learning_rate, "Adam learning rate");
    cmd->add_option("--batch", train_opt.batch, "mini-batch size (default 32, CSV 128)");
    cmd->add_option("--pretrain-iters", train_opt.pretrain_iters, "pretraining iterations");
    cmd->add_option("--iters", train_opt.iters,
                    "variational iterations (default 20000, CSV 50000)");
    cmd->add_option("--mc-samples", train_opt.mc_samples, "z draws per gradient estimate");
    cmd->add_option("--u-init", train_opt.u_init,
                    "initial raw scale (default -5 scaling, -10 svd)");
    cmd->add_option("--law", train_opt.law, "sampling law: uniform or normal");
    cmd->add_option("--checkpoint-policy", train_opt.policy,
                    "accepted (tau-gated scales), final, or auto (accepted for CSV data)");
    cmd->add_option("--hidden", hidden_arg, "comma-separated hidden widths");
    cmd->add_option("--m", train_opt.m, "ensemble size");
  };
  auto parse_hidden = [&]() {
    std::vector<std::size_t> widths;
    std::stringstream ss(hidden_arg);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) widths.push_back(static_cast<std::size_t>(std::stoul(item)));
    train_opt.hidden = widths;
  };

  int rc = 0;

  CLI::App* pre = app.add_subcommand("pretrain", "fit a deterministic network");
  add_data_options(pre, false);
  add_train_options(pre);
  pre->add_option("--out", out_path, "checkpoint output path")->required();
  pre->add_option("--log", log_path, "training log CSV path");
  pre->callback([&] {
    parse_hidden();
    rc = cmd_pretrain(data_opt, train_opt, out_path, log_path);
  });

  CLI::App* train = app.add_subcommand(
      "train", "fit a stochastic weight distribution (maxwent, maxwent-svd, bnn, ...)");
  add_data_options(train, false);
  add_train_options(train);
  train->add_option("--method", train_opt.method,
                    "vanilla, deep-ensemble, bnn, maxwent, maxwent-svd");
  train->add_option("--in", in_path, "pretrained checkpoint (trained on demand when absent)");
  train->add_option("--out", out_path, "fitted checkpoint output path")->required();
  train->add_option("--log", log_path, "training log CSV path");
  train->callback([&] {
    parse_hidden();
    rc = cmd_train(data_opt, train_opt, in_path, out_path, log_path);
  });

  CLI::App* eval = app.add_subcommand("eval", "score an in-distribution / OOD pair");
  add_data_options(eval, false);
  eval->add_option("--in", in_path, "fitted checkpoint")->required();
  eval->add_option("--out", out_path, "evaluation report JSON path")->required();
  eval->add_option("--scores", scores_path, "per-sample score CSV path");
  eval->add_option("--manifest", manifest_path, "dataset manifest JSON path");
  eval->add_option("--p", p, "stochastic draws per input");
  eval->add_option("--clip", clip, "a-posteriori clip level (0 reproduces the vanilla net)");
  eval->add_option("--method", method_label, "method label for the report");
  eval->callback([&] {
    rc = cmd_eval(data_opt, in_path, out_path, scores_path, manifest_path, p, clip,
                  method_label);
  });

  CLI::App* sweep = app.add_subcommand("clip-sweep",
                                       "uncertainty versus clip level over the standard list");
  add_data_options(sweep, false);
  sweep->add_option("--in", in_path, "fitted checkpoint")->required();
  sweep->add_option("--out", out_path, "sweep CSV output path")->required();
  sweep->add_option("--p", p, "stochastic draws per input");
  sweep->callback([&] { rc = cmd_clip_sweep(data_opt, in_path, out_path, p); });

  CLI::App* bench = app.add_subcommand("benchmark",
                                       "train and score every method/split combination");
  add_data_options(bench, true);
  add_train_options(bench);
  bench->add_option("--out", out_path, "output directory")->required();
  bench->add_option("--methods", methods_arg, "comma-separated method list");
  bench->add_option("--splits", splits_arg, "comma-separated split list");
  bench->add_option("--p", p, "stochastic draws per input");
  bench->callback([&] {
    parse_hidden();
    rc = cmd_benchmark(data_opt, train_opt, out_path, methods_arg, splits_arg, p);
  });

  CLI::App* verify = app.add_subcommand("verify", "run the closed-form cross-checks");
  verify->add_flag("--inject-lambda-mismatch", inject,
                   "negative control: perturb one closed form and expect a failure");
  verify->callback([&] { rc = cmd_verify(inject); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const ContractViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 3;
  }
  return rc;
}
