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

#include "gmmfad/profileopt.hpp"

#include <cmath>

#include "gmmfad/lbfgsb.hpp"

namespace gmmfad::profile {

ProfileObjective::ProfileObjective(const linops::WeightedCovOperator& scov, double n_eff, int q,
                                   linops::EigOptions eig_options)
    : scov_(&scov),
      scov_diag_(scov.diagonal()),
      n_eff_(n_eff),
      q_(q),
      eig_options_(eig_options) {
  if (q < 0 || q >= scov.dim()) {
    throw InvalidRank("profile objective: factor count " + std::to_string(q) +
                      " not below dimension " + std::to_string(scov.dim()));
  }
  if (!(n_eff > 0.0)) {
    throw ValidationError("profile objective: effective size must be positive");
  }
}

const linops::EigPairs& ProfileObjective::eigenpairs_at(const Vector& psi) {
  const Vector inv_sqrt = psi.array().rsqrt();
  linops::ScaledCovOperator g(*scov_, inv_sqrt);
  const Matrix* warm = eig_cache_.vectors.cols() == q_ && q_ > 0 ? &eig_cache_.vectors : nullptr;
  Matrix warm_copy;
  if (warm != nullptr) {
    warm_copy = *warm;
    warm = &warm_copy;
  }
  eig_cache_ = linops::top_eigenpairs(g, q_, eig_options_, warm);
  ++eigen_solves_;
  return eig_cache_;
}

ProfileObjective::Evaluation ProfileObjective::value_and_gradient(const Vector& log_psi) {
  if (log_psi.size() != scov_diag_.size()) {
    throw DimensionMismatch("profile objective: log_psi length mismatch");
  }
  if (!log_psi.allFinite()) {
    throw ValidationError("profile objective: log_psi must be finite");
  }
  const Vector psi = log_psi.array().exp();
  const Vector ratio = scov_diag_.cwiseQuotient(psi);

  double bracket = log_psi.sum() + ratio.sum();
  Vector inner = Vector::Ones(psi.size()) - ratio;
  if (q_ > 0) {
    const auto& eig = eigenpairs_at(psi);
    for (int j = 0; j < q_; ++j) {
      const double theta = eig.values[j];
      if (theta > 1.0) {
        bracket += std::log(theta) - theta + 1.0;
        inner += (theta - 1.0) * eig.vectors.col(j).cwiseAbs2();
      }
    }
  }
  Evaluation out;
  out.value = -0.5 * n_eff_ * bracket;
  out.gradient = -0.5 * n_eff_ * inner;
  return out;
}

Vector optimize_psi(ProfileObjective& obj, const Vector& psi_init, const Box& box,
                    int max_inner_iter) {
  if (!(box.lower > 0.0 && box.lower < box.upper)) {
    throw ValidationError("optimize_psi: box must satisfy 0 < lower < upper");
  }
  const Index p = psi_init.size();
  const Vector lo = Vector::Constant(p, std::log(box.lower));
  const Vector hi = Vector::Constant(p, std::log(box.upper));
  const Vector start = psi_init.cwiseMax(box.lower).cwiseMin(box.upper);

  if (obj.q() == 0) {
    // Separable: each term log psi + s/psi peaks at psi = s.
    return obj.scov_diag().cwiseMax(box.lower).cwiseMin(box.upper);
  }

  // Minimise -Q/m so the scale of the problem does not depend on cluster size.
  const double scale = 1.0 / obj.n_eff();
  double f_start = 0.0;
  double f_best = 0.0;
  Vector u_best;
  bool have_start = false;
  auto fg = [&](const Vector& u, Vector& grad) {
    auto ev = obj.value_and_gradient(u);
    grad = -scale * ev.gradient;
    const double f = -scale * ev.value;
    if (!have_start) {
      f_start = f;
      f_best = f;
      have_start = true;
    } else if (f < f_best) {
      f_best = f;
      u_best = u;
    }
    return f;
  };
  opt::BoxMinOptions options;
  options.max_iter = max_inner_iter;
  const Vector u0 = start.array().log();
  try {
    opt::minimize_box(fg, u0, lo, hi, options);
  } catch (const NoConvergence&) {
    // fall through with the best iterate seen so far
  }
  if (!have_start || u_best.size() == 0 || !(f_best < f_start)) {
    return start;
  }
  return u_best.array().exp();
}

Matrix recover_loadings(ProfileObjective& obj, const Vector& psi_hat) {
  const Index p = psi_hat.size();
  const int q = obj.q();
  Matrix loadings = Matrix::Zero(p, q);
  if (q == 0) {
    return loadings;
  }
  const auto& eig = obj.eigenpairs_at(psi_hat);
  const Vector sqrt_psi = psi_hat.array().sqrt();
  for (int j = 0; j < q; ++j) {
    const double delta = std::sqrt(std::max(eig.values[j] - 1.0, 0.0));
    if (delta > 0.0) {
      loadings.col(j) = delta * sqrt_psi.cwiseProduct(eig.vectors.col(j));
    }
  }
  canonicalize_signs(loadings);
  return loadings;
}

}  // namespace gmmfad::profile
