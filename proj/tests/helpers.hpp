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

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "gmmfad/model.hpp"
#include "gmmfad/rng.hpp"
#include "gmmfad/simgen.hpp"

namespace gmmfad::testing {

inline Matrix gaussian_matrix(Philox& rng, Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      m(i, j) = rng.normal();
    }
  }
  return m;
}

inline Vector gaussian_vector(Philox& rng, Index n) { return gaussian_matrix(rng, n, 1).col(0); }

// B B^T / p + 0.1 I with a spread of eigenvalues.
inline Matrix random_spd(Philox& rng, Index p) {
  const Matrix b = gaussian_matrix(rng, p, p);
  return b * b.transpose() / static_cast<double>(p) + 0.1 * Matrix::Identity(p, p);
}

inline ComponentParams random_component(Philox& rng, Index p, int q) {
  ComponentParams c;
  c.weight = 1.0;
  c.mean = gaussian_vector(rng, p);
  c.loadings = gaussian_matrix(rng, p, q);
  c.uniquenesses.resize(p);
  for (Index j = 0; j < p; ++j) {
    c.uniquenesses[j] = rng.uniform(0.2, 0.8);
  }
  return c;
}

inline Matrix dense_covariance(const ComponentParams& c) {
  Matrix s = c.loadings * c.loadings.transpose();
  s.diagonal() += c.uniquenesses;
  return s;
}

// Log-density through a full Cholesky of the assembled covariance.
inline double dense_log_density(const ComponentParams& c, const Vector& y) {
  const Matrix s = dense_covariance(c);
  const Eigen::LLT<Matrix> llt(s);
  const Matrix l = llt.matrixL();
  const Vector z = llt.matrixL().solve(y - c.mean);
  const double log_det = 2.0 * l.diagonal().array().log().sum();
  const double p = static_cast<double>(y.size());
  return -0.5 * (p * std::log(2.0 * std::numbers::pi) + log_det + z.squaredNorm());
}

inline DataMatrix simulated(Index n, Index p, int k, std::vector<int> qs, std::uint64_t seed,
                            double separation = sim::kHighSeparation) {
  sim::SimSpec spec;
  spec.n = n;
  spec.p = p;
  spec.n_components = k;
  spec.factors = std::move(qs);
  spec.separation = separation;
  spec.seed = seed;
  return sim::sample_dataset(sim::draw_truth(spec), n, seed);
}

}  // namespace gmmfad::testing
