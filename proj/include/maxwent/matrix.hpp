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

#ifndef MAXWENT_MATRIX_HPP_
#define MAXWENT_MATRIX_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "maxwent/common.hpp"

namespace maxwent {

/// Dense row-major matrix of doubles. The workhorse for batches, hidden
/// representations and eigenbases; deliberately minimal.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw ContractViolation("multiply: inner dimensions differ");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ai = a.row(i);
    double* oi = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double v = ai[k];
      if (v == 0.0) continue;
      const double* bk = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) oi[j] += v * bk[j];
    }
  }
  return out;
}

inline Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

/// (1/n) AᵀA. Symmetric PSD by construction, filled symmetrically so the
/// eigendecomposition's symmetry check never trips on rounding.
inline Matrix scaled_gram(const Matrix& a) {
  const std::size_t n = a.rows(), d = a.cols();
  if (n == 0) throw ContractViolation("scaled_gram: empty matrix");
  Matrix g(d, d);
  for (std::size_t i = 0; i < n; ++i) {
    const double* r = a.row(i);
    for (std::size_t p = 0; p < d; ++p) {
      const double v = r[p];
      if (v == 0.0) continue;
      double* gp = g.row(p);
      for (std::size_t q = p; q < d; ++q) gp[q] += v * r[q];
    }
  }
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t p = 0; p < d; ++p)
    for (std::size_t q = p; q < d; ++q) {
      g(p, q) *= inv;
      g(q, p) = g(p, q);
    }
  return g;
}

struct SymEigen {
  Matrix vectors;              // columns are eigenvectors
  std::vector<double> values;  // descending, negatives clamped to zero
};

/// Eigendecomposition of a symmetric PSD matrix by cyclic Jacobi rotations.
///
/// Postconditions: M = V diag(values) Vᵀ and VᵀV = Id, both to 1e-8 max-abs;
/// values sorted descending. Eigenvalues in [-1e-10, 0) are clamped to zero,
/// anything more negative violates the PSD precondition. Column signs are
/// normalized (largest-magnitude entry positive) so results are stable.
inline SymEigen sym_eigendecomposition(const Matrix& m) {
  const std::size_t n = m.rows();
  if (n == 0 || m.cols() != n)
    throw ContractViolation("sym_eigendecomposition: matrix must be square and non-empty");
  if (!m.all_finite())
    throw ContractViolation("sym_eigendecomposition: non-finite entries");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::fabs(m(i, j) - m(j, i)) > 1e-10)
        throw ContractViolation("sym_eigendecomposition: matrix not symmetric at (" +
                                std::to_string(i) + "," + std::to_string(j) + ")");

  Matrix a = m;
  // Accumulate rotations in row-major transposed form (rows are the future
  // eigenvectors) so the inner loops stay contiguous.
  Matrix vt = Matrix::identity(n);

  double frob = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) frob += a(i, j) * a(i, j);
  frob = std::sqrt(frob);
  const double stop = 1e-14 * std::max(frob, 1e-300);

  const int max_sweeps = 64;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (std::sqrt(2.0 * off) <= stop) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::fabs(apq) <= 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t;
        if (std::fabs(theta) > 1e100) {
          t = 1.0 / (2.0 * theta);
        } else {
          t = (theta >= 0.0 ? 1.0 : -1.0) /
              (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        const double app = a(p, p), aqq = a(q, q);
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        double* rp = a.row(p);
        double* rq = a.row(q);
        for (std::size_t i = 0; i < n; ++i) {
          if (i == p || i == q) continue;
          const double aip = rp[i], aiq = rq[i];
          const double np = c * aip - s * aiq;
          const double nq = s * aip + c * aiq;
          rp[i] = np;
          a(i, p) = np;
          rq[i] = nq;
          a(i, q) = nq;
        }
        double* vp = vt.row(p);
        double* vq = vt.row(q);
        for (std::size_t i = 0; i < n; ++i) {
          const double vip = vp[i], viq = vq[i];
          vp[i] = c * vip - s * viq;
          vq[i] = s * vip + c * viq;
        }
      }
    }
  }

  const Matrix v = transpose(vt);
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = a(i, i);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return values[x] > values[y]; });

  SymEigen result;
  result.values.resize(n);
  result.vectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double val = values[order[j]];
    if (val < 0.0) {
      if (val < -1e-10)
        throw ContractViolation("sym_eigendecomposition: eigenvalue " + std::to_string(val) +
                                " below PSD tolerance");
      val = 0.0;
    }
    result.values[j] = val;

    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double mag = std::fabs(v(i, order[j]));
      if (mag > best) {
        best = mag;
        arg = i;
      }
    }
    const double flip = v(arg, order[j]) < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) result.vectors(i, j) = flip * v(i, order[j]);
  }
  return result;
}

/// Projection of each (internally centered) row onto the top eigenvector of
/// the empirical covariance. Zero-variance data yields all-zero scores.
inline std::vector<double> pca_first_scores(const Matrix& x) {
  const std::size_t n = x.rows(), b = x.cols();
  if (n < 2) throw ContractViolation("pca_first_scores: need at least 2 rows");

  Matrix centered(n, b);
  for (std::size_t j = 0; j < b; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += x(i, j);
    mean /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) centered(i, j) = x(i, j) - mean;
  }

  const SymEigen eig = sym_eigendecomposition(scaled_gram(centered));
  std::vector<double> scores(n, 0.0);
  if (eig.values[0] <= 0.0) return scores;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < b; ++j) s += centered(i, j) * eig.vectors(j, 0);
    scores[i] = s;
  }
  return scores;
}

}  // namespace maxwent

#endif  // MAXWENT_MATRIX_HPP_
