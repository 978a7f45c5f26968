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

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gmmfad/errors.hpp"

namespace gmmfad {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;
using Labels = std::vector<int>;

/// n x p observations (one sample per row) with optional ground-truth
/// labels. Labels are for evaluation only and never touch the fit.
class DataMatrix {
 public:
  explicit DataMatrix(Matrix values, std::optional<Labels> labels = std::nullopt);

  const Matrix& values() const { return values_; }
  Index n() const { return values_.rows(); }
  Index p() const { return values_.cols(); }
  const std::optional<Labels>& labels() const { return labels_; }

 private:
  Matrix values_;
  std::optional<Labels> labels_;
};

/// One mixture component of a factor-analytic Gaussian mixture:
/// covariance = loadings * loadings^T + diag(uniquenesses).
struct ComponentParams {
  double weight = 1.0;
  Vector mean;
  Matrix loadings;       // p x q
  Vector uniquenesses;   // diagonal of Psi, length p

  Index dim() const { return mean.size(); }
  int n_factors() const { return static_cast<int>(loadings.cols()); }
};

/// Throws ValidationError when shapes disagree, the weight is outside (0,1],
/// or some uniqueness is below psi_min.
void validate(const ComponentParams& component, double psi_min = 0.0);

struct MixtureModel {
  std::vector<ComponentParams> components;

  int n_components() const { return static_cast<int>(components.size()); }
  Index dim() const { return components.empty() ? 0 : components.front().dim(); }
  std::vector<int> factor_counts() const;
};

/// Shapes agree across components and weights sum to one within 1e-12.
void validate(const MixtureModel& model, double psi_min = 0.0);

struct Responsibilities {
  Matrix gamma;  // n x K, rows sum to one

  Labels hard_assignment() const;
};

struct FitReport {
  MixtureModel model;
  Responsibilities responsibilities;
  std::vector<double> loglik_trace;
  double loglik = 0.0;
  long long n_params = 0;
  double bic = 0.0;
  int n_iter = 0;
  bool converged = false;
  double wall_time = 0.0;  // seconds spent inside the fit call
  Labels hard_assignment;
  std::string engine;
};

/// (K-1) + K*p + sum_k [p*q_k + p - q_k(q_k-1)/2].
long long free_param_count(Index p, std::span<const int> factor_counts);
long long free_param_count(const MixtureModel& model);

/// Largest integer q with q < p + (1 - sqrt(1 + 8p)) / 2. Returns -1 at p = 1.
int max_admissible_q(Index p);

/// Number of covariance parameters saved by the factor structure,
/// ((p - q)^2 - (p + q)) / 2.
double factor_reduction(Index p, int q);

/// -2 logL + d ln n. Lower is better.
double bic(double loglik, long long n_params, Index n);

/// Flips each loading column so that its largest-magnitude entry (first one
/// on ties) is nonnegative.
void canonicalize_signs(Matrix& loadings);

/// v -> L (L^T v) + Psi v, without materialising the p x p covariance.
class CovarianceOperator {
 public:
  explicit CovarianceOperator(const ComponentParams& component)
      : loadings_(component.loadings), psi_(component.uniquenesses) {}

  Index dim() const { return psi_.size(); }
  Vector apply(const Vector& v) const;

 private:
  Matrix loadings_;
  Vector psi_;
};

inline CovarianceOperator covariance_of(const ComponentParams& component) {
  return CovarianceOperator(component);
}

}  // namespace gmmfad
