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

#pragma once

#include "gmmfad/model.hpp"

namespace gmmfad::linops {

/// A symmetric linear map R^p -> R^p known only through its action.
class SymmetricOperator {
 public:
  virtual ~SymmetricOperator() = default;
  virtual Index dim() const = 0;
  /// out <- A v. `out` is resized as needed and must not alias `v`.
  virtual void apply(const Vector& v, Vector& out) const = 0;

  Vector apply(const Vector& v) const {
    Vector out;
    apply(v, out);
    return out;
  }
};

/// Wraps a caller-supplied symmetric matrix.
class DenseOperator final : public SymmetricOperator {
 public:
  explicit DenseOperator(Matrix a);
  Index dim() const override { return a_.rows(); }
  using SymmetricOperator::apply;
  void apply(const Vector& v, Vector& out) const override;

 private:
  Matrix a_;
};

/// Weighted scatter about `center`:
///   v -> (1/W) sum_i w_i (y_i - c) ((y_i - c)^T v),   W = sum_i w_i.
/// Each application makes two passes over the data; no p x p storage.
class WeightedCovOperator final : public SymmetricOperator {
 public:
  /// Throws ValidationError on shape mismatch or negative weights and
  /// DegenerateWeights when W < 1e-10 * n.
  WeightedCovOperator(const Matrix& data, Vector weights, Vector center);

  Index dim() const override { return center_.size(); }
  using SymmetricOperator::apply;
  void apply(const Vector& v, Vector& out) const override;

  double weight_sum() const { return weight_sum_; }
  const Vector& weights() const { return weights_; }
  const Vector& center() const { return center_; }
  const Matrix& data() const { return *data_; }

  /// Diagonal of the scatter matrix, one pass over the data.
  Vector diagonal() const;

 private:
  const Matrix* data_;
  Vector weights_;  // pre-divided by W
  Vector center_;
  double weight_sum_;
};

class DegenerateWeights : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// G = D S D with D = diag(inv_sqrt_psi) and S a weighted scatter operator.
class ScaledCovOperator final : public SymmetricOperator {
 public:
  ScaledCovOperator(const WeightedCovOperator& base, Vector inv_sqrt_psi);

  Index dim() const override { return base_->dim(); }
  using SymmetricOperator::apply;
  void apply(const Vector& v, Vector& out) const override;

 private:
  const WeightedCovOperator* base_;
  Vector inv_sqrt_psi_;
  mutable Vector scratch_;
};

struct EigPairs {
  Vector values;   // descending
  Matrix vectors;  // p x q, orthonormal columns
  int matvecs = 0;
  int restarts = 0;
};

struct EigOptions {
  double tol = 1e-8;           // relative residual
  int max_restarts = 200;
  Index dense_threshold = 64;  // dense solve when dim < dense_threshold
};

/// The q algebraically largest eigenpairs of a symmetric operator.
///
/// Below the dense threshold the operator is assembled column by column and
/// solved exactly. Otherwise a thick-restart Lanczos iteration with full
/// reorthogonalisation is used, with basis size min(p, 2q + 10). `warm_start`
/// (p x k, optional) seeds the starting vector with previously converged
/// eigenvectors.
///
/// Throws InvalidRank when q >= p and NoConvergence after max_restarts.
/// Eigenvector signs are canonicalised (largest-magnitude entry positive).
EigPairs top_eigenpairs(const SymmetricOperator& op, int q, const EigOptions& options = {},
                        const Matrix* warm_start = nullptr);

/// Lanczos path only, regardless of dimension.
EigPairs lanczos_top_eigenpairs(const SymmetricOperator& op, int q, const EigOptions& options = {},
                                const Matrix* warm_start = nullptr);

/// Dense path only: assembles the operator (p matvecs) and diagonalises it.
EigPairs dense_top_eigenpairs(const SymmetricOperator& op, int q);

/// Records the side length of every square dense matrix assembled from an
/// operator or from data (dense eigensolves here, the AECM baseline's
/// scatter matrices). Lets large-p runs assert that nothing p x p was built.
namespace dense_guard {
void note_square(Index dim);
Index largest_square();
void reset();
}  // namespace dense_guard

}  // namespace gmmfad::linops
