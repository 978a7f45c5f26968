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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "gmmfad/ecm.hpp"
#include "gmmfad/linops.hpp"
#include "helpers.hpp"

using namespace gmmfad;
using namespace gmmfad::linops;

namespace {

Matrix dense_scatter(const Matrix& y, const Vector& w, const Vector& c) {
  const Matrix centered = y.rowwise() - c.transpose();
  return centered.transpose() * w.asDiagonal() * centered / w.sum();
}

// Largest principal angle between two column spaces, in radians.
double subspace_angle(const Matrix& a, const Matrix& b) {
  Eigen::JacobiSVD<Matrix> svd(a.transpose() * b);
  const double smin = std::min(svd.singularValues().minCoeff(), 1.0);
  return std::acos(smin);
}

EigOptions lanczos_only() {
  EigOptions o;
  o.dense_threshold = 0;
  return o;
}

}  // namespace

TEST_CASE("weighted covariance against dense assembly") {
  Philox rng(1);
  for (Index p : {1, 5, 20}) {
    const Matrix y = testing::gaussian_matrix(rng, 40, p);
    const Vector w = Vector::Ones(40);
    const Vector mean = y.colwise().mean();
    const WeightedCovOperator op(y, w, mean);
    const Matrix dense = dense_scatter(y, w, mean);
    for (int t = 0; t < 5; ++t) {
      const Vector v = testing::gaussian_vector(rng, p);
      CHECK((op.apply(v) - dense * v).cwiseAbs().maxCoeff() < 1e-10);
    }
    CHECK((op.diagonal() - dense.diagonal()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(op.apply(Vector::Zero(p)).isZero(0.0));
  }
}

TEST_CASE("weighted covariance with uneven weights") {
  Philox rng(2);
  const Matrix y = testing::gaussian_matrix(rng, 30, 8);
  Vector w(30);
  for (Index i = 0; i < 30; ++i) {
    w[i] = rng.uniform();
  }
  const Vector c = testing::gaussian_vector(rng, 8);
  const WeightedCovOperator op(y, w, c);
  const Matrix dense = dense_scatter(y, w, c);
  const Vector v = testing::gaussian_vector(rng, 8);
  CHECK((op.apply(v) - dense * v).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(op.weight_sum() == doctest::Approx(w.sum()).epsilon(1e-14));
}

TEST_CASE("single-point weights give a rank-one action") {
  Philox rng(3);
  const Matrix y = testing::gaussian_matrix(rng, 10, 6);
  Vector w = Vector::Zero(10);
  w[4] = 1.0;
  const Vector mu = testing::gaussian_vector(rng, 6);
  const WeightedCovOperator op(y, w, mu);
  const Vector d = y.row(4).transpose() - mu;
  const Vector v = testing::gaussian_vector(rng, 6);
  CHECK((op.apply(v) - d * d.dot(v)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("degenerate weights are rejected") {
  const Matrix y = Matrix::Ones(10, 3);
  CHECK_THROWS_AS(WeightedCovOperator(y, Vector::Zero(10), Vector::Zero(3)), DegenerateWeights);
  Vector neg = Vector::Ones(10);
  neg[0] = -1.0;
  CHECK_THROWS_AS(WeightedCovOperator(y, neg, Vector::Zero(3)), ValidationError);
  CHECK_THROWS_AS(WeightedCovOperator(y, Vector::Ones(9), Vector::Zero(3)), ValidationError);
}

TEST_CASE("scaled covariance is D S D") {
  Philox rng(4);
  const Matrix y = testing::gaussian_matrix(rng, 25, 7);
  const Vector w = Vector::Ones(25);
  const Vector c = y.colwise().mean();
  const WeightedCovOperator base(y, w, c);
  Vector d(7);
  for (Index j = 0; j < 7; ++j) {
    d[j] = rng.uniform(0.5, 2.0);
  }
  const ScaledCovOperator op(base, d);
  const Matrix dense = d.asDiagonal() * dense_scatter(y, w, c) * d.asDiagonal();
  const Vector v = testing::gaussian_vector(rng, 7);
  CHECK((op.apply(v) - dense * v).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("diagonal operator") {
  Vector diag(5);
  diag << 5, 4, 3, 2, 1;
  const DenseOperator op(diag.asDiagonal().toDenseMatrix());
  for (const auto& opts : {EigOptions{}, lanczos_only()}) {
    const auto e = top_eigenpairs(op, 2, opts);
    CHECK(e.values[0] == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(e.values[1] == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(std::abs(e.vectors(0, 0)) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(e.vectors(1, 1)) == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("lanczos against dense eigendecomposition") {
  Philox rng(5);
  for (int t = 0; t < 20; ++t) {
    const Index p = 10 + static_cast<Index>(rng.below(41));
    const int q = 1 + static_cast<int>(rng.below(5));
    const Matrix a = testing::random_spd(rng, p);
    const Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    const auto e = lanczos_top_eigenpairs(DenseOperator(a), q);
    for (int j = 0; j < q; ++j) {
      CHECK(std::abs(e.values[j] - es.eigenvalues()[p - 1 - j]) < 1e-8);
    }
    const Matrix ref = es.eigenvectors().rightCols(q);
    CHECK(subspace_angle(e.vectors, ref) < 1e-6);
    // Orthonormal columns and small residuals.
    CHECK((e.vectors.transpose() * e.vectors - Matrix::Identity(q, q)).cwiseAbs().maxCoeff() <
          1e-8);
    for (int j = 0; j < q; ++j) {
      const Vector r = a * e.vectors.col(j) - e.values[j] * e.vectors.col(j);
      CHECK(r.norm() <= 1e-8 * std::max(1.0, e.values[j]) * 10.0);
    }
  }
}

TEST_CASE("eigenvalues nest as q grows") {
  Philox rng(6);
  const Matrix a = testing::random_spd(rng, 80);
  const DenseOperator op(a);
  const auto small = top_eigenpairs(op, 3);
  const auto large = top_eigenpairs(op, 4);
  for (int j = 0; j < 3; ++j) {
    CHECK(std::abs(small.values[j] - large.values[j]) < 1e-8 * large.values[0]);
  }
}

TEST_CASE("rank must be below the dimension") {
  const DenseOperator op(Matrix::Identity(4, 4));
  CHECK_THROWS_AS(top_eigenpairs(op, 4), InvalidRank);
  CHECK(top_eigenpairs(op, 0).values.size() == 0);
}

TEST_CASE("warm start reaches the same pairs") {
  Philox rng(7);
  const Matrix a = testing::random_spd(rng, 120);
  const DenseOperator op(a);
  const auto cold = top_eigenpairs(op, 4);
  const Matrix warm_vecs = cold.vectors;
  const auto warm = top_eigenpairs(op, 4, {}, &warm_vecs);
  CHECK((cold.values - warm.values).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(subspace_angle(cold.vectors, warm.vectors) < 1e-6);
}

TEST_CASE("scatter eigenvalues at p=150 match dense assembly") {
  const auto data = testing::simulated(150, 150, 2, {2}, 3);
  FitConfig config;
  config.n_components = 2;
  config.factors = {2};
  config.n_random_starts = 3;
  config.seed = 3;
  const auto report = fit(data, config);
  for (int k = 0; k < 2; ++k) {
    const Vector w = report.responsibilities.gamma.col(k);
    const Vector mu = report.model.components[static_cast<size_t>(k)].mean;
    const WeightedCovOperator op(data.values(), w, mu);
    const Matrix dense = dense_scatter(data.values(), w, mu);
    const Eigen::SelfAdjointEigenSolver<Matrix> es(dense);
    const auto e = top_eigenpairs(op, 5);
    for (int j = 0; j < 5; ++j) {
      CHECK(std::abs(e.values[j] - es.eigenvalues()[149 - j]) < 1e-6);
    }
  }
}

TEST_CASE("scaled eigenvalues ignore row order") {
  Philox rng(8);
  const Matrix y = testing::gaussian_matrix(rng, 90, 70);
  Vector w(90);
  for (Index i = 0; i < 90; ++i) {
    w[i] = rng.uniform();
  }
  const Vector c = y.colwise().mean();
  Vector d(70);
  for (Index j = 0; j < 70; ++j) {
    d[j] = rng.uniform(0.5, 2.0);
  }
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(90);
  perm.setIdentity();
  for (Index i = 89; i > 0; --i) {
    std::swap(perm.indices()[i], perm.indices()[static_cast<Index>(rng.below(i + 1))]);
  }
  const Matrix yp = perm * y;
  const Vector wp = perm * w;
  const WeightedCovOperator a(y, w, c);
  const WeightedCovOperator b(yp, wp, c);
  const auto ea = top_eigenpairs(ScaledCovOperator(a, d), 4);
  const auto eb = top_eigenpairs(ScaledCovOperator(b, d), 4);
  CHECK((ea.values - eb.values).cwiseAbs().maxCoeff() < 1e-8 * ea.values[0]);
}

TEST_CASE("no square matrix on the matrix-free path") {
  Philox rng(9);
  const Matrix y = testing::gaussian_matrix(rng, 50, 300);
  const WeightedCovOperator op(y, Vector::Ones(50), y.colwise().mean());
  dense_guard::reset();
  top_eigenpairs(op, 5);
  CHECK(dense_guard::largest_square() < 300);
  dense_guard::reset();
  top_eigenpairs(DenseOperator(Matrix::Identity(10, 10)), 2);
  CHECK(dense_guard::largest_square() == 10);
}
