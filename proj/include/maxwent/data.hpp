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

#ifndef MAXWENT_DATA_HPP_
#define MAXWENT_DATA_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "maxwent/common.hpp"
#include "maxwent/matrix.hpp"
#include "maxwent/random.hpp"

namespace maxwent {

enum class Task { Regression, BinaryClassification, MultiClass };

struct Dataset {
  Matrix X;
  std::vector<double> y;
  Task task = Task::Regression;
  std::size_t classes = 2;

  std::size_t n() const { return X.rows(); }
  std::size_t features() const { return X.cols(); }
};

enum class SplitMode { Extrapolation, Interpolation, Random };

struct SplitSpec {
  SplitMode mode = SplitMode::Extrapolation;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

inline constexpr double kTwoPi = 6.283185307179586;

/// Ground truth of the univariate regression benchmark.
inline double regression_truth(double x) {
  return 0.3 * (x + std::sin(kTwoPi * x) + std::sin(2.0 * kTwoPi * x));
}

namespace detail {

inline Dataset make_moons(std::size_t n, double noise, RandomStream& stream) {
  const std::size_t n_outer = n / 2;
  const std::size_t n_inner = n - n_outer;
  Dataset ds;
  ds.task = Task::BinaryClassification;
  ds.X = Matrix(n, 2);
  ds.y.resize(n);

  auto arc = [](std::size_t i, std::size_t count) {
    if (count <= 1) return 0.0;
    return M_PI * static_cast<double>(i) / static_cast<double>(count - 1);
  };
  for (std::size_t i = 0; i < n_outer; ++i) {
    const double t = arc(i, n_outer);
    ds.X(i, 0) = std::cos(t);
    ds.X(i, 1) = std::sin(t);
    ds.y[i] = 0.0;
  }
  for (std::size_t i = 0; i < n_inner; ++i) {
    const double t = arc(i, n_inner);
    ds.X(n_outer + i, 0) = 1.0 - std::cos(t);
    ds.X(n_outer + i, 1) = 0.5 - std::sin(t);
    ds.y[n_outer + i] = 1.0;
  }
  if (noise > 0.0)
    for (std::size_t i = 0; i < n; ++i) {
      ds.X(i, 0) += noise * stream.next_normal();
      ds.X(i, 1) += noise * stream.next_normal();
    }
  return ds;
}

}  // namespace detail

/// Two interleaving half circles (radius 1, second arc shifted by (1, -0.5))
/// with isotropic Gaussian noise; labels balanced within one point.
inline std::pair<Dataset, Dataset> gen_two_moons(std::size_t n_train, std::size_t n_val,
                                                 double noise, std::uint64_t seed) {
  if (n_train == 0 || n_val == 0) throw ContractViolation("gen_two_moons: counts must be >= 1");
  RandomStream stream(seed, SampleLaw::StandardNormal);
  Dataset train = detail::make_moons(n_train, noise, stream);
  Dataset val = detail::make_moons(n_val, noise, stream);
  return {std::move(train), std::move(val)};
}

/// Univariate regression task: inputs from an equal mixture of two Gaussians
/// centered at -0.5 and 0.75 (std 0.1), targets regression_truth(x) plus
/// centered Gaussian noise of variance 0.02.
inline std::pair<Dataset, Dataset> gen_1d_regression(std::size_t n_train, std::size_t n_val,
                                                     std::uint64_t seed) {
  if (n_train == 0 || n_val == 0)
    throw ContractViolation("gen_1d_regression: counts must be >= 1");
  RandomStream stream(seed, SampleLaw::StandardNormal);
  const double noise_std = std::sqrt(0.02);
  auto make = [&](std::size_t n) {
    Dataset ds;
    ds.task = Task::Regression;
    ds.X = Matrix(n, 1);
    ds.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double center = stream.next_unit() < 0.5 ? -0.5 : 0.75;
      const double x = center + 0.1 * stream.next_normal();
      ds.X(i, 0) = x;
      ds.y[i] = regression_truth(x) + noise_std * stream.next_normal();
    }
    return ds;
  };
  Dataset train = make(n_train);
  Dataset val = make(n_val);
  return {std::move(train), std::move(val)};
}

/// n points uniform on the circle of the given radius; out-of-distribution
/// fixture for the two-moons task.
inline Dataset gen_ring(std::size_t n, double radius, std::uint64_t seed) {
  RandomStream stream(seed, SampleLaw::StandardNormal);
  Dataset ds;
  ds.task = Task::BinaryClassification;
  ds.X = Matrix(n, 2);
  ds.y.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = kTwoPi * stream.next_unit();
    ds.X(i, 0) = radius * std::cos(a);
    ds.X(i, 1) = radius * std::sin(a);
  }
  return ds;
}

/// Correlated-feature regression table: a few latent factors mixed into more
/// observed columns plus small independent jitter, with a smooth nonlinear
/// target. Used by the benchmark smoke fixture, where the interesting domain
/// shifts live in low-variance feature directions.
inline Dataset gen_correlated_tabular(std::size_t n, std::uint64_t seed) {
  RandomStream stream(seed, SampleLaw::StandardNormal);
  Dataset ds;
  ds.task = Task::Regression;
  const std::size_t b = 6;
  ds.X = Matrix(n, b);
  ds.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 2.0 * (2.0 * stream.next_unit() - 1.0);
    const double u = stream.next_normal();
    ds.X(i, 0) = t + 0.02 * stream.next_normal();
    ds.X(i, 1) = t + 0.02 * stream.next_normal();
    ds.X(i, 2) = std::sin(t) + 0.02 * stream.next_normal();
    ds.X(i, 3) = 0.5 * t + 0.5 * u + 0.02 * stream.next_normal();
    ds.X(i, 4) = u + 0.02 * stream.next_normal();
    ds.X(i, 5) = std::cos(t) * u * 0.3 + 0.02 * stream.next_normal();
    ds.y[i] = std::sin(2.0 * t) + 0.5 * t + 0.3 * u + 0.05 * stream.next_normal();
  }
  return ds;
}

// ---------------------------------------------------------------------------
// CSV ingestion
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline double parse_cell(const std::string& cell, std::size_t row, const std::string& col) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw IoError("load_csv: non-numeric cell at data row " + std::to_string(row) +
                  ", column '" + col + "'");
  return v;
}

}  // namespace detail

/// Read a headered numeric CSV; the named target column becomes y, every
/// other column a feature (header order preserved).
inline Dataset load_csv(const std::string& path, const std::string& target_column,
                        Task task = Task::Regression) {
  std::ifstream in(path);
  if (!in) throw IoError("load_csv: cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw IoError("load_csv: '" + path + "' is empty");
  const std::vector<std::string> header = detail::split_csv_line(line);

  std::size_t target_idx = header.size();
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == target_column) target_idx = j;
  if (target_idx == header.size())
    throw IoError("load_csv: target column '" + target_column + "' not found in '" + path + "'");

  std::vector<std::vector<double>> rows;
  std::vector<double> targets;
  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    ++row_no;
    const std::vector<std::string> cells = detail::split_csv_line(line);
    if (cells.size() != header.size())
      throw IoError("load_csv: data row " + std::to_string(row_no) + " has " +
                    std::to_string(cells.size()) + " cells, expected " +
                    std::to_string(header.size()));
    std::vector<double> features;
    features.reserve(header.size() - 1);
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const double v = detail::parse_cell(cells[j], row_no, header[j]);
      if (j == target_idx)
        targets.push_back(v);
      else
        features.push_back(v);
    }
    rows.push_back(std::move(features));
  }
  if (rows.empty()) throw IoError("load_csv: '" + path + "' has no data rows");

  Dataset ds;
  ds.task = task;
  ds.X = Matrix(rows.size(), header.size() - 1);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j + 1 < header.size(); ++j) ds.X(i, j) = rows[i][j];
  ds.y = std::move(targets);
  return ds;
}

inline void save_csv(const std::string& path, const Dataset& ds,
                     const std::string& target_name = "y") {
  std::ofstream out(path);
  if (!out) throw IoError("save_csv: cannot open '" + path + "' for writing");
  for (std::size_t j = 0; j < ds.features(); ++j) out << "f" << j << ",";
  out << target_name << "\n";
  char buf[32];
  for (std::size_t i = 0; i < ds.n(); ++i) {
    for (std::size_t j = 0; j < ds.features(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", ds.X(i, j));
      out << buf << ",";
    }
    std::snprintf(buf, sizeof(buf), "%.17g", ds.y[i]);
    out << buf << "\n";
  }
  if (!out) throw IoError("save_csv: write to '" + path + "' failed");
}

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

inline Dataset take_rows(const Dataset& ds, const std::vector<std::size_t>& idx) {
  Dataset out;
  out.task = ds.task;
  out.classes = ds.classes;
  out.X = Matrix(idx.size(), ds.features());
  out.y.resize(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (std::size_t j = 0; j < ds.features(); ++j) out.X(i, j) = ds.X(idx[i], j);
    out.y[i] = ds.y[idx[i]];
  }
  return out;
}

/// Split along the first principal component of the inputs. The internal
/// domain is the inclusive [25%, 75%] percentile band (linear-interpolation
/// quantiles); ties are broken by row index so the band always holds about
/// half the rows. Extrapolation trains on the internal band, interpolation
/// on its complement.
inline std::pair<Dataset, Dataset> pca_split(const Dataset& ds, SplitMode mode) {
  if (mode == SplitMode::Random)
    throw ContractViolation("pca_split: mode must be Extrapolation or Interpolation");
  const std::size_t n = ds.n();
  if (n < 4) throw ContractViolation("pca_split: need at least 4 rows");

  const std::vector<double> scores = pca_first_scores(ds.X);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] < scores[b];
    return a < b;
  });

  const double lo_pos = 0.25 * static_cast<double>(n - 1);
  const double hi_pos = 0.75 * static_cast<double>(n - 1);
  const auto lo = static_cast<std::size_t>(std::ceil(lo_pos));
  const auto hi = static_cast<std::size_t>(std::floor(hi_pos));

  std::vector<std::size_t> internal, external;
  for (std::size_t rank = 0; rank < n; ++rank)
    (rank >= lo && rank <= hi ? internal : external).push_back(order[rank]);
  std::sort(internal.begin(), internal.end());
  std::sort(external.begin(), external.end());

  Dataset inside = take_rows(ds, internal);
  Dataset outside = take_rows(ds, external);
  if (mode == SplitMode::Extrapolation) return {std::move(inside), std::move(outside)};
  return {std::move(outside), std::move(inside)};
}

/// Seeded shuffle split; first part gets round(fraction * n) rows.
inline std::pair<Dataset, Dataset> random_split(const Dataset& ds, double fraction,
                                                std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw ContractViolation("random_split: fraction must be in (0, 1)");
  const std::size_t n = ds.n();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  RandomStream stream(seed);
  for (std::size_t i = n; i > 1; --i)
    std::swap(idx[i - 1], idx[stream.next_below(i)]);
  auto n_first = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  n_first = std::min(std::max<std::size_t>(n_first, 1), n - 1);
  std::vector<std::size_t> a(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_first));
  std::vector<std::size_t> b(idx.begin() + static_cast<std::ptrdiff_t>(n_first), idx.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return {take_rows(ds, a), take_rows(ds, b)};
}

// ---------------------------------------------------------------------------
// Standardization
// ---------------------------------------------------------------------------

/// Affine feature/target map fitted on the training partition only.
/// Classification targets are never standardized; regression targets are.
struct Standardizer {
  std::vector<double> x_mean, x_std;    // x_std floored at 1e-8
  std::vector<bool> degenerate;         // constant columns map to exactly 0
  double y_mean = 0.0, y_std = 1.0;
  bool scale_targets = false;

  static constexpr double kStdFloor = 1e-8;
};

inline Standardizer standardize_fit(const Dataset& train) {
  if (train.n() == 0) throw ContractViolation("standardize_fit: empty training set");
  const std::size_t n = train.n(), b = train.features();
  Standardizer s;
  s.x_mean.resize(b);
  s.x_std.resize(b);
  s.degenerate.resize(b);
  for (std::size_t j = 0; j < b; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += train.X(i, j);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = train.X(i, j) - mean;
      var += d * d;
    }
    var /= static_cast<double>(n);
    const double sd = std::sqrt(var);
    s.x_mean[j] = mean;
    s.degenerate[j] = sd <= Standardizer::kStdFloor;
    s.x_std[j] = std::max(sd, Standardizer::kStdFloor);
  }
  if (train.task == Task::Regression) {
    s.scale_targets = true;
    double mean = 0.0;
    for (double v : train.y) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : train.y) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    s.y_mean = mean;
    s.y_std = std::max(std::sqrt(var), Standardizer::kStdFloor);
  }
  return s;
}

inline Dataset standardize_apply(const Standardizer& s, const Dataset& ds) {
  if (ds.features() != s.x_mean.size())
    throw ContractViolation("standardize_apply: feature count mismatch");
  Dataset out = ds;
  for (std::size_t i = 0; i < out.n(); ++i)
    for (std::size_t j = 0; j < out.features(); ++j)
      out.X(i, j) = s.degenerate[j] ? 0.0 : (ds.X(i, j) - s.x_mean[j]) / s.x_std[j];
  if (s.scale_targets)
    for (std::size_t i = 0; i < out.n(); ++i) out.y[i] = (ds.y[i] - s.y_mean) / s.y_std;
  return out;
}

inline Dataset standardize_invert(const Standardizer& s, const Dataset& ds) {
  Dataset out = ds;
  for (std::size_t i = 0; i < out.n(); ++i)
    for (std::size_t j = 0; j < out.features(); ++j)
      out.X(i, j) = ds.X(i, j) * s.x_std[j] + s.x_mean[j];
  if (s.scale_targets)
    for (std::size_t i = 0; i < out.n(); ++i) out.y[i] = ds.y[i] * s.y_std + s.y_mean;
  return out;
}

/// Fit on train, apply the same map to train and every other dataset.
inline Standardizer standardize_fit_apply(Dataset& train, std::vector<Dataset*> others = {}) {
  const Standardizer s = standardize_fit(train);
  train = standardize_apply(s, train);
  for (Dataset* other : others)
    if (other != nullptr) *other = standardize_apply(s, *other);
  return s;
}

}  // namespace maxwent

#endif  // MAXWENT_DATA_HPP_
