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

#include "gmmfad/linops.hpp"

namespace gmmfad::profile {

/// Box on the uniquenesses. The optimiser works on log(psi).
struct Box {
  double lower = 1e-4;
  double upper = 1e4;
};

/// Factor-analysis objective of one component with the loadings maximised
/// out. For a weighted scatter S, effective size m and rank q:
///
///   Q(psi) = -(m/2) [ sum_j log psi_j + sum_j S_jj / psi_j
///                     + sum_{j<=q, theta_j>1} (log theta_j - theta_j + 1) ]
///
/// where theta_j are the leading eigenvalues of Psi^{-1/2} S Psi^{-1/2}.
/// Eigenvalues at or below one contribute nothing (their loading column is
/// zero). The additive constant is dropped.
class ProfileObjective {
 public:
  ProfileObjective(const linops::WeightedCovOperator& scov, double n_eff, int q,
                   linops::EigOptions eig_options = {});

  struct Evaluation {
    double value = 0.0;
    Vector gradient;  // with respect to log(psi)
  };

  /// Q and dQ/dlog(psi). The gradient uses d theta_j / d psi_i =
  /// -theta_j v_ij^2 / psi_i, so
  ///   dQ/dlog psi_i = -(m/2) [1 - S_ii/psi_i + sum_{theta_j>1} (theta_j-1) v_ij^2].
  Evaluation value_and_gradient(const Vector& log_psi);
  double value(const Vector& log_psi) { return value_and_gradient(log_psi).value; }

  /// Leading q eigenpairs of Psi^{-1/2} S Psi^{-1/2}; warm-started from the
  /// previous solve.
  const linops::EigPairs& eigenpairs_at(const Vector& psi);

  const linops::EigPairs& eig_cache() const { return eig_cache_; }
  const Vector& scov_diag() const { return scov_diag_; }
  const linops::WeightedCovOperator& scov() const { return *scov_; }
  double n_eff() const { return n_eff_; }
  int q() const { return q_; }
  int eigen_solves() const { return eigen_solves_; }

 private:
  const linops::WeightedCovOperator* scov_;
  Vector scov_diag_;
  double n_eff_;
  int q_;
  linops::EigOptions eig_options_;
  linops::EigPairs eig_cache_;
  int eigen_solves_ = 0;
};

/// Maximises Q over the box, starting from psi_init (clamped into the box).
/// Never returns a point with a lower objective than the clamped start.
Vector optimize_psi(ProfileObjective& obj, const Vector& psi_init, const Box& box = {},
                    int max_inner_iter = 50);

/// Loadings maximising the objective at psi_hat:
/// Psi^{1/2} V Delta with Delta_jj = sqrt(max(theta_j - 1, 0)).
Matrix recover_loadings(ProfileObjective& obj, const Vector& psi_hat);

}  // namespace gmmfad::profile
