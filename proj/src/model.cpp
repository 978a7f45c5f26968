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

#include "gmmfad/model.hpp"

#include <cmath>

namespace gmmfad {

DataMatrix::DataMatrix(Matrix values, std::optional<Labels> labels)
    : values_(std::move(values)), labels_(std::move(labels)) {
  if (values_.rows() < 2) {
    throw ValidationError("data needs at least 2 rows");
  }
  if (values_.cols() < 1) {
    throw ValidationError("data needs at least 1 column");
  }
  if (!values_.allFinite()) {
    throw ValidationError("data contains non-finite entries");
  }
  if (labels_) {
    if (static_cast<Index>(labels_->size()) != values_.rows()) {
      throw DimensionMismatch("label count " + std::to_string(labels_->size()) +
                              " differs from row count " +
                              std::to_string(values_.rows()));
    }
    for (int label : *labels_) {
      if (label < 0) {
        throw ValidationError("labels must be nonnegative");
      }
    }
  }
}

void validate(const ComponentParams& c, double psi_min) {
  const Index p = c.mean.size();
  if (p < 1) {
    throw ValidationError("component has empty mean");
  }
  if (c.uniquenesses.size() != p || c.loadings.rows() != p) {
    throw DimensionMismatch("component parameter shapes disagree");
  }
  if (!(c.weight > 0.0 && c.weight <= 1.0 + 1e-12)) {
    throw ValidationError("component weight outside (0, 1]");
  }
  if (!c.mean.allFinite() || !c.loadings.allFinite() ||
      !c.uniquenesses.allFinite()) {
    throw ValidationError("component has non-finite parameters");
  }
  if ((c.uniquenesses.array() <= 0.0).any()) {
    throw ValidationError("uniquenesses must be positive");
  }
  if ((c.uniquenesses.array() < psi_min).any()) {
    throw ValidationError("uniqueness below lower bound");
  }
}

std::vector<int> MixtureModel::factor_counts() const {
  std::vector<int> qs;
  qs.reserve(components.size());
  for (const auto& c : components) {
    qs.push_back(c.n_factors());
  }
  return qs;
}

void validate(const MixtureModel& model, double psi_min) {
  if (model.components.empty()) {
    throw ValidationError("mixture has no components");
  }
  const Index p = model.dim();
  double total = 0.0;
  for (const auto& c : model.components) {
    validate(c, psi_min);
    if (c.dim() != p) {
      throw DimensionMismatch("components disagree on dimension");
    }
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ValidationError("mixing weights do not sum to one");
  }
}

Labels Responsibilities::hard_assignment() const {
  Labels out(static_cast<size_t>(gamma.rows()));
  for (Index i = 0; i < gamma.rows(); ++i) {
    Index best = 0;
    gamma.row(i).maxCoeff(&best);
    out[static_cast<size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

long long free_param_count(Index p, std::span<const int> factor_counts) {
  const long long K = static_cast<long long>(factor_counts.size());
  const long long pp = static_cast<long long>(p);
  long long d = (K - 1) + K * pp;
  for (int q : factor_counts) {
    const long long qq = q;
    d += pp * qq + pp - qq * (qq - 1) / 2;
  }
  return d;
}

long long free_param_count(const MixtureModel& model) {
  const auto qs = model.factor_counts();
  return free_param_count(model.dim(), qs);
}

int max_admissible_q(Index p) {
  if (p < 1) {
    throw ValidationError("dimension must be positive");
  }
  // Admissible q < p satisfies (p - q)^2 > p + q; start from the real root
  // and settle with exact integer checks.
  const double bound =
      static_cast<double>(p) + (1.0 - std::sqrt(1.0 + 8.0 * static_cast<double>(p))) / 2.0;
  long long q = static_cast<long long>(std::floor(bound)) + 1;
  const long long pp = static_cast<long long>(p);
  auto ok = [pp](long long x) { return x < pp && (pp - x) * (pp - x) > pp + x; };
  while (q >= 0 && !ok(q)) {
    --q;
  }
  while (ok(q + 1)) {
    ++q;
  }
  return static_cast<int>(q);
}

double factor_reduction(Index p, int q) {
  const double pp = static_cast<double>(p);
  const double qq = q;
  return 0.5 * ((pp - qq) * (pp - qq) - (pp + qq));
}

double bic(double loglik, long long n_params, Index n) {
  return -2.0 * loglik + static_cast<double>(n_params) * std::log(static_cast<double>(n));
}

void canonicalize_signs(Matrix& loadings) {
  for (Index j = 0; j < loadings.cols(); ++j) {
    Index arg = 0;
    double best = -1.0;
    for (Index i = 0; i < loadings.rows(); ++i) {
      const double a = std::abs(loadings(i, j));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (loadings.rows() > 0 && loadings(arg, j) < 0.0) {
      loadings.col(j) = -loadings.col(j);
    }
  }
}

Vector CovarianceOperator::apply(const Vector& v) const {
  if (v.size() != psi_.size()) {
    throw DimensionMismatch("covariance operator: vector length mismatch");
  }
  Vector out = psi_.cwiseProduct(v);
  if (loadings_.cols() > 0) {
    out.noalias() += loadings_ * (loadings_.transpose() * v);
  }
  return out;
}

}  // namespace gmmfad
