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

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "gmmfad/linops.hpp"
#include "gmmfad/model.hpp"
#include "gmmfad/profileopt.hpp"

namespace gmmfad {

/// Settings shared by the hybrid ECM engine and the AECM baseline.
struct FitConfig {
  int n_components = 1;
  /// One entry = common q for every component; K entries = per-cluster q.
  std::vector<int> factors{1};
  double tol = 1e-6;  // absolute log-likelihood increase
  int max_iter = 500;
  int n_random_starts = 20;
  int short_run_iters = 5;
  int n_finalists = 3;
  bool use_kmeans_start = true;
  std::uint64_t seed = 0;
  int threads = 1;  // 0 = all cores

  profile::Box box;
  int max_inner_iter = 50;
  linops::EigOptions eig;

  Index aecm_p_limit = 500;
  bool force = false;  // lift the AECM dimension limit
};

/// Per-component factor counts (length K) for a config.
std::vector<int> resolve_factors(const FitConfig& config);

/// Throws ValidationError unless every q_k is admissible for the data shape.
void validate_config(const FitConfig& config, Index n, Index p);

/// Minimum effective cluster size: max(q + 1, 2).
double cluster_floor(int q);

namespace ecm {

/// Cached Woodbury/determinant-lemma quantities for one component.
class ComponentDensity {
 public:
  explicit ComponentDensity(const ComponentParams& component);

  double log_density(const Eigen::Ref<const Vector>& y) const;
  /// Log-density of every row of `data`; O(n p q), no p x p matrix.
  Vector log_density_rows(const Matrix& data) const;
  double log_det() const { return log_det_; }

 private:
  Vector mean_;
  Vector inv_psi_;
  Matrix scaled_loadings_;  // Psi^{-1} Lambda
  Eigen::LLT<Matrix> chol_m_;  // I + Lambda^T Psi^{-1} Lambda
  double log_det_ = 0.0;
};

/// log N_p(y; mu, Lambda Lambda^T + Psi).
double log_density(const ComponentParams& component, const Vector& y);

struct EStepResult {
  Responsibilities resp;
  double loglik = 0.0;
};

/// Posterior memberships via row-wise log-sum-exp, and the observed-data
/// log-likelihood.
EStepResult e_step(const MixtureModel& model, const DataMatrix& data);

struct CmOptions {
  profile::Box box;
  int max_inner_iter = 50;
  linops::EigOptions eig;
  int threads = 1;
};

CmOptions cm_options(const FitConfig& config);

/// Weights and means in closed form, then per component the profile
/// objective over the uniquenesses (warm-started from `current`) followed by
/// loading recovery. Throws EmptyCluster when a component's effective size
/// falls below cluster_floor(q_k).
MixtureModel cm_step(const DataMatrix& data, const Responsibilities& resp,
                     std::span<const int> factors, const MixtureModel& current,
                     const CmOptions& options = {});

}  // namespace ecm

/// One conditional-maximisation sweep: (data, responsibilities, current) -> next.
using StepFunction =
    std::function<MixtureModel(const DataMatrix&, const Responsibilities&, const MixtureModel&)>;

/// Progress of one EM-type run.
struct RunState {
  MixtureModel model;
  Responsibilities resp;
  std::vector<double> trace;
  int n_iter = 0;
  bool converged = false;
};

/// Alternates E-steps and `step` until the log-likelihood increase drops
/// below `tol` or `max_iter` sweeps have been made in total.
void iterate(const DataMatrix& data, RunState& state, const StepFunction& step, int max_iter,
             double tol);

/// Random start: K distinct observations as means, global feature variances
/// as uniquenesses, N(0, 0.01^2) loadings, uniform weights.
MixtureModel random_start(const DataMatrix& data, std::span<const int> factors,
                          std::uint64_t seed, std::uint64_t stream, const profile::Box& box);

/// Lloyd's k-means (10 restarts) on standardised data; the best partition
/// gives weights, means and within-cluster variances. Throws EmptyCluster if
/// a cluster is too small for its factor count.
MixtureModel kmeans_start(const DataMatrix& data, std::span<const int> factors,
                          std::uint64_t seed, const profile::Box& box);

/// Hard k-means labels (exposed for tests).
Labels kmeans_labels(const Matrix& standardized, int k, std::uint64_t seed, int restarts = 10);

/// Many short runs from random (plus k-means) starts; the best few by
/// log-likelihood continue to convergence; the best finalist wins.
FitReport fit_multistart(const DataMatrix& data, const FitConfig& config, const StepFunction& step,
                         const std::string& engine);

/// Builds the report (BIC, hard labels, canonical loading signs) from a run.
FitReport make_report(const DataMatrix& data, RunState state, const std::string& engine,
                      double seconds);

/// Hybrid ECM with profile-likelihood factor updates.
FitReport fit(const DataMatrix& data, const FitConfig& config);

/// Hybrid ECM from a given starting model, no multistart.
FitReport fit_from(const DataMatrix& data, const MixtureModel& init, const FitConfig& config);

}  // namespace gmmfad
