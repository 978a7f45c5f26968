// Copyright 2026 The gmmfad Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gmmfad/linops.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <cmath>

#include "gmmfad/rng.hpp"

namespace gmmfad::linops {

namespace dense_guard {
namespace {
std::atomic<Index> g_largest{0};
}

void note_square(Index dim) {
  Index cur = g_largest.load();
  while (dim > cur && !g_largest.compare_exchange_weak(cur, dim)) {
  }
}

Index largest_square() { return g_largest.load(); }

void reset() { g_largest.store(0); }
}  // namespace dense_guard

DenseOperator::DenseOperator(Matrix a) : a_(std::move(a)) {
  if (a_.rows() != a_.cols()) {
    throw DimensionMismatch("dense operator must be square");
  }
}

void DenseOperator::apply(const Vector& v, Vector& out) const {
  if (v.size() != a_.cols()) {
    throw DimensionMismatch("dense operator: vector length mismatch");
  }
  out.noalias() = a_ * v;
}

WeightedCovOperator::WeightedCovOperator(const Matrix& data, Vector weights, Vector center)
    : data_(&data), weights_(std::move(weights)), center_(std::move(center)) {
  const Index n = data.rows();
  if (weights_.size() != n || center_.size() != data.cols()) {
    throw DimensionMismatch("weighted covariance: shape mismatch");
  }
  if ((weights_.array() < 0.0).any() || !weights_.allFinite()) {
    throw ValidationError("weighted covariance: weights must be finite and nonnegative");
  }
  weight_sum_ = 0.0;
  for (Index i = 0; i < n; ++i) {
    weight_sum_ += weights_[i];
  }
  if (weight_sum_ < 1e-10 * static_cast<double>(n)) {
    throw DegenerateWeights("weighted covariance: weight sum " + std::to_string(weight_sum_) +
                            " is degenerate");
  }
  weights_ /= weight_sum_;
}

void WeightedCovOperator::apply(const Vector& v, Vector& out) const {
  if (v.size() != center_.size()) {
    throw DimensionMismatch("weighted covariance: vector length mismatch");
  }
  // t_i = (y_i - c)^T v, then out = sum_i w_i t_i (y_i - c).
  Vector t = (*data_) * v;
  t.array() -= center_.dot(v);
  t.array() *= weights_.array();
  double tsum = 0.0;
  for (Index i = 0; i < t.size(); ++i) {
    tsum += t[i];
  }
  out.noalias() = data_->transpose() * t;
  out -= tsum * center_;
}

Vector WeightedCovOperator::diagonal() const {
  const Index p = center_.size();
  Vector d = Vector::Zero(p);
  for (Index j = 0; j < p; ++j) {
    const auto col = data_->col(j).array() - center_[j];
    d[j] = (weights_.array() * col.square()).sum();
  }
  return d;
}

ScaledCovOperator::ScaledCovOperator(const WeightedCovOperator& base, Vector inv_sqrt_psi)
    : base_(&base), inv_sqrt_psi_(std::move(inv_sqrt_psi)) {
  if (inv_sqrt_psi_.size() != base.dim()) {
    throw DimensionMismatch("scaled covariance: scaling length mismatch");
  }
}

void ScaledCovOperator::apply(const Vector& v, Vector& out) const {
  if (v.size() != inv_sqrt_psi_.size()) {
    throw DimensionMismatch("scaled covariance: vector length mismatch");
  }
  Vector scaled = inv_sqrt_psi_.cwiseProduct(v);
  base_->apply(scaled, out);
  out.array() *= inv_sqrt_psi_.array();
}

namespace {

EigPairs take_top(const Eigen::SelfAdjointEigenSolver<Matrix>& es, const Matrix& basis, int q) {
  // Eigen returns ascending order.
  const Index m = es.eigenvalues().size();
  EigPairs out;
  out.values.resize(q);
  out.vectors.resize(basis.rows(), q);
  for (int j = 0; j < q; ++j) {
    const Index src = m - 1 - j;
    out.values[j] = es.eigenvalues()[src];
    out.vectors.col(j) = basis * es.eigenvectors().col(src);
  }
  return out;
}

void check_rank(Index p, int q) {
  if (q < 0 || q >= p) {
    throw InvalidRank("requested " + std::to_string(q) + " eigenpairs of a " +
                      std::to_string(p) + "-dimensional operator");
  }
}

// Removes the components of r along the first `cols` columns of V, twice
// (classical Gram-Schmidt with one reorthogonalisation pass).
void orthogonalize(const Matrix& V, Index cols, Vector& r) {
  if (cols == 0) {
    return;
  }
  for (int pass = 0; pass < 2; ++pass) {
    const Vector c = V.leftCols(cols).transpose() * r;
    r.noalias() -= V.leftCols(cols) * c;
  }
}

}  // namespace

EigPairs dense_top_eigenpairs(const SymmetricOperator& op, int q) {
  const Index p = op.dim();
  check_rank(p, q);
  dense_guard::note_square(p);
  Matrix a(p, p);
  Vector e = Vector::Zero(p);
  Vector col;
  for (Index j = 0; j < p; ++j) {
    e[j] = 1.0;
    op.apply(e, col);
    a.col(j) = col;
    e[j] = 0.0;
  }
  const Matrix sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success) {
    throw NoConvergence("dense symmetric eigensolver failed");
  }
  EigPairs out = take_top(es, Matrix::Identity(p, p), q);
  out.matvecs = static_cast<int>(p);
  canonicalize_signs(out.vectors);
  return out;
}

EigPairs lanczos_top_eigenpairs(const SymmetricOperator& op, int q, const EigOptions& options,
                                const Matrix* warm_start) {
  const Index p = op.dim();
  check_rank(p, q);
  EigPairs out;
  if (q == 0) {
    out.values.resize(0);
    out.vectors.resize(p, 0);
    return out;
  }
  const Index m = std::min<Index>(p, 2 * static_cast<Index>(q) + 10);
  const Index keep = std::min<Index>(m - 1, q + (m - q) / 2);

  Matrix V(p, m + 1);
  Matrix AV(p, m);
  Matrix T = Matrix::Zero(m, m);

  Philox rng(0x6c616e637a6f73ULL);
  auto fresh_direction = [&]() {
    Vector r(p);
    for (Index i = 0; i < p; ++i) {
      r[i] = rng.normal();
    }
    return r;
  };

  Vector start = fresh_direction();
  if (warm_start != nullptr && warm_start->rows() == p && warm_start->cols() > 0) {
    start = warm_start->rowwise().sum() + 1e-2 * start / std::sqrt(static_cast<double>(p));
  }
  V.col(0) = start.normalized();

  Vector w;
  Vector r;
  Index k = 0;  // columns of V whose image is already in AV
  int matvecs = 0;
  for (int restart = 0; restart <= options.max_restarts; ++restart) {
    for (Index j = k; j < m; ++j) {
      op.apply(V.col(j), w);
      ++matvecs;
      AV.col(j) = w;
      const Vector h = V.leftCols(j + 1).transpose() * w;
      T.block(0, j, j + 1, 1) = h;
      T.block(j, 0, 1, j + 1) = h.transpose();
      if (j + 1 == p) {
        break;  // basis spans the whole space
      }
      r = w - V.leftCols(j + 1) * h;
      orthogonalize(V, j + 1, r);
      double beta = r.norm();
      const double scale = std::max(w.norm(), 1e-300);
      if (beta <= 1e-12 * scale) {
        // Invariant subspace: continue with a fresh direction.
        r = fresh_direction();
        orthogonalize(V, j + 1, r);
        beta = r.norm();
        if (beta <= 1e-12) {
          throw NoConvergence("Lanczos: could not extend basis");
        }
      }
      V.col(j + 1) = r / beta;
    }

    const Matrix sym = 0.5 * (T + T.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
    if (es.info() != Eigen::Success) {
      throw NoConvergence("Lanczos: projected eigensolve failed");
    }
    // Ritz pairs, descending.
    const Index want = std::max<Index>(keep, q);
    Matrix S(m, want);
    Vector theta(want);
    for (Index j = 0; j < want; ++j) {
      theta[j] = es.eigenvalues()[m - 1 - j];
      S.col(j) = es.eigenvectors().col(m - 1 - j);
    }
    Matrix X = V.leftCols(m) * S;
    Matrix AX = AV * S;

    bool converged = true;
    for (int j = 0; j < q; ++j) {
      const double res = (AX.col(j) - theta[j] * X.col(j)).norm();
      if (res > options.tol * std::max(1.0, std::abs(theta[j]))) {
        converged = false;
        break;
      }
    }
    // A full-space projection is exact up to rounding.
    if (converged || m == p) {
      out.values = theta.head(q);
      out.vectors = X.leftCols(q);
      out.matvecs = matvecs;
      out.restarts = restart;
      canonicalize_signs(out.vectors);
      return out;
    }

    // Thick restart: keep the leading Ritz vectors and the residual direction.
    const Vector next = V.col(m);
    V.leftCols(keep) = X.leftCols(keep);
    AV.leftCols(keep) = AX.leftCols(keep);
    T.setZero();
    const Matrix tk = X.leftCols(keep).transpose() * AX.leftCols(keep);
    T.topLeftCorner(keep, keep) = 0.5 * (tk + tk.transpose());
    r = next;
    orthogonalize(V, keep, r);
    double nrm = r.norm();
    if (nrm <= 1e-12) {
      r = fresh_direction();
      orthogonalize(V, keep, r);
      nrm = r.norm();
    }
    V.col(keep) = r / nrm;
    k = keep;
  }
  throw NoConvergence("Lanczos: no convergence after " + std::to_string(options.max_restarts) +
                      " restarts");
}

EigPairs top_eigenpairs(const SymmetricOperator& op, int q, const EigOptions& options,
                        const Matrix* warm_start) {
  const Index p = op.dim();
  check_rank(p, q);
  if (q == 0) {
    EigPairs out;
    out.values.resize(0);
    out.vectors.resize(p, 0);
    return out;
  }
  if (p < options.dense_threshold) {
    return dense_top_eigenpairs(op, q);
  }
  return lanczos_top_eigenpairs(op, q, options, warm_start);
}

}  // namespace gmmfad::linops
