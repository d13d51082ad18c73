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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "maxwent/data.hpp"

using namespace maxwent;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("noiseless moons sit on their arcs") {
  const auto [train, val] = gen_two_moons(40, 10, 0.0, 0);
  for (std::size_t i = 0; i < train.n(); ++i) {
    const double x = train.X(i, 0), y = train.X(i, 1);
    if (train.y[i] == 0.0) {
      CHECK(x * x + y * y == doctest::Approx(1.0));
      CHECK(y >= -1e-12);
    } else {
      const double dx = x - 1.0, dy = y - 0.5;
      CHECK(dx * dx + dy * dy == doctest::Approx(1.0));
      CHECK(y <= 0.5 + 1e-12);
    }
  }
}

TEST_CASE("default moons counts and balance") {
  const auto [train, val] = gen_two_moons(200, 50, 0.1, 7);
  CHECK(train.n() == 200);
  CHECK(val.n() == 50);
  auto balance = [](const Dataset& ds) {
    std::ptrdiff_t diff = 0;
    for (double y : ds.y) diff += y == 0.0 ? 1 : -1;
    return diff;
  };
  CHECK(std::abs(balance(train)) <= 1);
  CHECK(std::abs(balance(val)) <= 1);
}

TEST_CASE("moons generation is seed deterministic") {
  const auto [a_train, a_val] = gen_two_moons(64, 16, 0.1, 3);
  const auto [b_train, b_val] = gen_two_moons(64, 16, 0.1, 3);
  CHECK(a_train.y == b_train.y);
  for (std::size_t i = 0; i < a_train.n(); ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(a_train.X(i, j) == b_train.X(i, j));
  for (std::size_t i = 0; i < a_val.n(); ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(a_val.X(i, j) == b_val.X(i, j));
}

TEST_CASE("regression ground truth reference points") {
  CHECK(regression_truth(0.0) == doctest::Approx(0.0));
  CHECK(regression_truth(0.25) == doctest::Approx(0.375));
}

TEST_CASE("regression inputs concentrate around the two mixture centers") {
  RandomStream unused(0);
  const auto [train, val] = gen_1d_regression(5000, 1000, 11);
  std::size_t inside = 0;
  for (std::size_t i = 0; i < train.n(); ++i) {
    const double x = train.X(i, 0);
    if (x >= -0.9 && x <= 1.15) ++inside;
  }
  CHECK(static_cast<double>(inside) / static_cast<double>(train.n()) >= 0.95);
}

TEST_CASE("csv loader smoke and error paths") {
  const auto path = temp_file("maxwent_test_smoke.csv");
  {
    std::ofstream out(path);
    out << "a,b,y\n1,2,3\n4,5,6\n7,8,9\n";
  }
  const Dataset ds = load_csv(path.string(), "y");
  CHECK(ds.n() == 3);
  CHECK(ds.features() == 2);
  CHECK(ds.X(1, 0) == 4.0);
  CHECK(ds.y == std::vector<double>{3.0, 6.0, 9.0});

  CHECK_THROWS_WITH_AS(load_csv(path.string(), "missing"), doctest::Contains("missing"), IoError);
  CHECK_THROWS_AS(load_csv("/nonexistent/nope.csv", "y"), IoError);

  {
    std::ofstream out(path);
    out << "a,y\n1,2\nbad,4\n";
  }
  CHECK_THROWS_WITH_AS(load_csv(path.string(), "y"), doctest::Contains("row 2"), IoError);
  std::filesystem::remove(path);
}

TEST_CASE("csv write then read round-trips values") {
  const auto path = temp_file("maxwent_test_roundtrip.csv");
  const auto [ds, unused] = gen_1d_regression(50, 10, 4);
  save_csv(path.string(), ds);
  const Dataset back = load_csv(path.string(), "y");
  REQUIRE(back.n() == ds.n());
  for (std::size_t i = 0; i < ds.n(); ++i) {
    CHECK(back.X(i, 0) == ds.X(i, 0));
    CHECK(back.y[i] == ds.y[i]);
  }
  std::filesystem::remove(path);
}

TEST_CASE("pca split keeps the middle half in extrapolation mode") {
  Dataset ds;
  ds.X = Matrix(100, 1);
  ds.y.resize(100);
  for (std::size_t i = 0; i < 100; ++i) {
    ds.X(i, 0) = static_cast<double>(i);
    ds.y[i] = 0.0;
  }
  const auto [train, ood] = pca_split(ds, SplitMode::Extrapolation);
  REQUIRE(train.n() == 50);
  REQUIRE(ood.n() == 50);
  std::set<double> values;
  for (std::size_t i = 0; i < train.n(); ++i) values.insert(train.X(i, 0));
  for (double v = 25.0; v <= 74.0; v += 1.0) CHECK(values.count(v) == 1);
}

TEST_CASE("extrapolation and interpolation train sets partition the rows") {
  const auto [moons, unused] = gen_two_moons(97, 10, 0.1, 5);
  const auto [extra_train, extra_ood] = pca_split(moons, SplitMode::Extrapolation);
  const auto [inter_train, inter_ood] = pca_split(moons, SplitMode::Interpolation);
  CHECK(extra_train.n() + inter_train.n() == moons.n());
  CHECK(extra_train.n() == inter_ood.n());

  auto key = [](const Dataset& ds, std::size_t i) {
    return std::make_pair(ds.X(i, 0), ds.X(i, 1));
  };
  std::set<std::pair<double, double>> seen;
  for (std::size_t i = 0; i < extra_train.n(); ++i) seen.insert(key(extra_train, i));
  for (std::size_t i = 0; i < inter_train.n(); ++i) seen.insert(key(inter_train, i));
  CHECK(seen.size() == moons.n());
}

TEST_CASE("constant inputs split by row index with balanced sizes") {
  Dataset ds;
  ds.X = Matrix(11, 2, 3.0);
  ds.y.assign(11, 0.0);
  const auto [train, ood] = pca_split(ds, SplitMode::Extrapolation);
  CHECK(train.n() >= 5);
  CHECK(train.n() <= 7);
  CHECK(train.n() + ood.n() == 11);
}

TEST_CASE("random split is disjoint, exhaustive and seeded") {
  const auto [ds, unused] = gen_two_moons(50, 10, 0.1, 2);
  const auto [a, b] = random_split(ds, 0.8, 42);
  CHECK(a.n() == 40);
  CHECK(b.n() == 10);
  const auto [a2, b2] = random_split(ds, 0.8, 42);
  for (std::size_t i = 0; i < a.n(); ++i) CHECK(a.X(i, 0) == a2.X(i, 0));
}

TEST_CASE("standardization centers and scales the training partition") {
  auto [train, val] = gen_1d_regression(200, 40, 9);
  Dataset val_copy = val;
  const Standardizer s = standardize_fit_apply(train, {&val_copy});

  double mean = 0.0;
  for (std::size_t i = 0; i < train.n(); ++i) mean += train.X(i, 0);
  mean /= static_cast<double>(train.n());
  double var = 0.0;
  for (std::size_t i = 0; i < train.n(); ++i)
    var += (train.X(i, 0) - mean) * (train.X(i, 0) - mean);
  var /= static_cast<double>(train.n());
  CHECK(std::fabs(mean) <= 1e-10);
  CHECK(std::fabs(std::sqrt(var) - 1.0) <= 1e-10);

  double ymean = 0.0;
  for (double v : train.y) ymean += v;
  ymean /= static_cast<double>(train.n());
  CHECK(std::fabs(ymean) <= 1e-10);

  // the validation set uses the training statistics, not its own
  const Dataset raw_val = standardize_invert(s, val_copy);
  for (std::size_t i = 0; i < val.n(); ++i) {
    CHECK(raw_val.X(i, 0) == doctest::Approx(val.X(i, 0)).epsilon(1e-10));
    CHECK(raw_val.y[i] == doctest::Approx(val.y[i]).epsilon(1e-10));
  }
}

TEST_CASE("constant columns map to exactly zero") {
  Dataset ds;
  ds.X = Matrix(5, 2);
  for (std::size_t i = 0; i < 5; ++i) {
    ds.X(i, 0) = 42.0;
    ds.X(i, 1) = static_cast<double>(i);
  }
  ds.y.assign(5, 1.0);
  const Standardizer s = standardize_fit(ds);
  const Dataset out = standardize_apply(s, ds);
  for (std::size_t i = 0; i < 5; ++i) CHECK(out.X(i, 0) == 0.0);
}

TEST_CASE("classification targets are never standardized") {
  auto [train, val] = gen_two_moons(60, 20, 0.1, 1);
  const std::vector<double> labels = train.y;
  standardize_fit_apply(train, {});
  CHECK(train.y == labels);
}
