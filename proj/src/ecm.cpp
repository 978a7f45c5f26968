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

#include "gmmfad/ecm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "gmmfad/parallel.hpp"
#include "gmmfad/rng.hpp"

namespace gmmfad {

std::vector<int> resolve_factors(const FitConfig& config) {
  const int K = config.n_components;
  if (K < 1) {
    throw ValidationError("number of components must be at least 1");
  }
  if (config.factors.size() == 1) {
    return std::vector<int>(static_cast<size_t>(K), config.factors.front());
  }
  if (static_cast<int>(config.factors.size()) != K) {
    throw ValidationError("factor list has " + std::to_string(config.factors.size()) +
                          " entries for " + std::to_string(K) + " components");
  }
  return config.factors;
}

void validate_config(const FitConfig& config, Index n, Index p) {
  const auto qs = resolve_factors(config);
  if (config.n_components > n) {
    throw ValidationError("more components than observations");
  }
  const int qmax = max_admissible_q(p);
  for (int q : qs) {
    if (q < 0) {
      throw ValidationError("factor counts must be nonnegative");
    }
    if (q > 0 && (q > qmax || q >= std::min(n, p))) {
      throw ValidationError("factor count " + std::to_string(q) + " not admissible for n=" +
                            std::to_string(n) + ", p=" + std::to_string(p) +
                            " (largest admissible " + std::to_string(std::max(qmax, 0)) + ")");
    }
  }
  if (!(config.tol > 0.0) || config.max_iter < 1) {
    throw ValidationError("tolerance must be positive and max_iter at least 1");
  }
  if (config.n_random_starts < 0 || config.short_run_iters < 0 || config.n_finalists < 1) {
    throw ValidationError("invalid multistart settings");
  }
  if (config.n_random_starts == 0 && !config.use_kmeans_start) {
    throw ValidationError("no starting values requested");
  }
}

double cluster_floor(int q) { return std::max(static_cast<double>(q) + 1.0, 2.0); }

namespace ecm {

ComponentDensity::ComponentDensity(const ComponentParams& c)
    : mean_(c.mean), inv_psi_(c.uniquenesses.cwiseInverse()) {
  const Index p = c.dim();
  const int q = c.n_factors();
  if (c.uniquenesses.size() != p || c.loadings.rows() != p) {
    throw DimensionMismatch("component shapes disagree");
  }
  if (!(c.uniquenesses.array() > 0.0).all() || !c.uniquenesses.allFinite() ||
      !c.loadings.allFinite() || !c.mean.allFinite()) {
    throw NonFiniteDensity("component parameters are not finite/positive");
  }
  scaled_loadings_ = inv_psi_.asDiagonal() * c.loadings;
  Matrix m = Matrix::Identity(q, q);
  if (q > 0) {
    m.noalias() += c.loadings.transpose() * scaled_loadings_;
  }
  chol_m_.compute(m);
  if (chol_m_.info() != Eigen::Success) {
    throw NonFiniteDensity("capacitance matrix not positive definite");
  }
  double log_det_m = 0.0;
  const Matrix& l = chol_m_.matrixLLT();
  for (int j = 0; j < q; ++j) {
    log_det_m += 2.0 * std::log(l(j, j));
  }
  log_det_ = log_det_m + c.uniquenesses.array().log().sum();
}

double ComponentDensity::log_density(const Eigen::Ref<const Vector>& y) const {
  if (y.size() != mean_.size()) {
    throw DimensionMismatch("log_density: vector length mismatch");
  }
  const Vector r = y - mean_;
  double mahal = (r.array().square() * inv_psi_.array()).sum();
  if (scaled_loadings_.cols() > 0) {
    const Vector b = scaled_loadings_.transpose() * r;
    const Vector c = chol_m_.matrixL().solve(b);
    mahal -= c.squaredNorm();
  }
  const double p = static_cast<double>(mean_.size());
  const double out = -0.5 * (p * std::log(2.0 * std::numbers::pi) + log_det_ + mahal);
  if (!std::isfinite(out)) {
    throw NonFiniteDensity("log density is not finite");
  }
  return out;
}

Vector ComponentDensity::log_density_rows(const Matrix& data) const {
  const Index p = data.cols();
  if (p != mean_.size()) {
    throw DimensionMismatch("log_density_rows: column count mismatch");
  }
  const Matrix r = data.rowwise() - mean_.transpose();
  Vector mahal = r.array().square().matrix() * inv_psi_;
  if (scaled_loadings_.cols() > 0) {
    const Matrix b = (r * scaled_loadings_).transpose();  // q x n
    const Matrix c = chol_m_.matrixL().solve(b);
    mahal -= c.colwise().squaredNorm().transpose();
  }
  const double constant =
      -0.5 * (static_cast<double>(p) * std::log(2.0 * std::numbers::pi) + log_det_);
  Vector out = constant - 0.5 * mahal.array();
  if (!out.allFinite()) {
    throw NonFiniteDensity("log density is not finite");
  }
  return out;
}

double log_density(const ComponentParams& component, const Vector& y) {
  return ComponentDensity(component).log_density(y);
}

EStepResult e_step(const MixtureModel& model, const DataMatrix& data) {
  const Index n = data.n();
  const int K = model.n_components();
  if (model.dim() != data.p()) {
    throw DimensionMismatch("e_step: model and data dimensions differ");
  }
  Matrix logp(n, K);
  for (int k = 0; k < K; ++k) {
    const auto& c = model.components[static_cast<size_t>(k)];
    logp.col(k) = ComponentDensity(c).log_density_rows(data.values()).array() + std::log(c.weight);
  }
  EStepResult out;
  out.resp.gamma.resize(n, K);
  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double mx = logp.row(i).maxCoeff();
    double s = 0.0;
    for (int k = 0; k < K; ++k) {
      s += std::exp(logp(i, k) - mx);
    }
    const double lse = mx + std::log(s);
    for (int k = 0; k < K; ++k) {
      out.resp.gamma(i, k) = std::exp(logp(i, k) - lse);
    }
    total += lse;
  }
  out.loglik = total;
  return out;
}

CmOptions cm_options(const FitConfig& config) {
  CmOptions o;
  o.box = config.box;
  o.max_inner_iter = config.max_inner_iter;
  o.eig = config.eig;
  o.threads = 1;
  return o;
}

MixtureModel cm_step(const DataMatrix& data, const Responsibilities& resp,
                     std::span<const int> factors, const MixtureModel& current,
                     const CmOptions& options) {
  const Index n = data.n();
  const Index p = data.p();
  const int K = static_cast<int>(factors.size());
  if (resp.gamma.rows() != n || resp.gamma.cols() != K || current.n_components() != K) {
    throw DimensionMismatch("cm_step: responsibilities, factors and model disagree");
  }
  const Matrix& y = data.values();

  // Closed-form weights first so emptying clusters fail before any solve.
  std::vector<double> sums(static_cast<size_t>(K), 0.0);
  for (int k = 0; k < K; ++k) {
    double s = 0.0;
    for (Index i = 0; i < n; ++i) {
      s += resp.gamma(i, k);
    }
    sums[static_cast<size_t>(k)] = s;
    if (s < cluster_floor(factors[static_cast<size_t>(k)])) {
      throw EmptyCluster(k, s);
    }
  }

  MixtureModel next;
  next.components.resize(static_cast<size_t>(K));
  parallel_for(K, options.threads, [&](int k) {
    const auto kk = static_cast<size_t>(k);
    const double w_sum = sums[kk];
    const Vector w = resp.gamma.col(k);
    auto& c = next.components[kk];
    c.weight = w_sum / static_cast<double>(n);
    c.mean = (y.transpose() * w) / w_sum;

    linops::WeightedCovOperator scov(y, w, c.mean);
    profile::ProfileObjective obj(scov, w_sum, factors[kk], options.eig);
    const Vector& warm = current.components[kk].uniquenesses;
    const Vector psi_init = warm.size() == p ? warm : Vector(scov.diagonal());
    c.uniquenesses = profile::optimize_psi(obj, psi_init, options.box, options.max_inner_iter);
    c.loadings = profile::recover_loadings(obj, c.uniquenesses);
  });

  double total = 0.0;
  for (const auto& c : next.components) {
    total += c.weight;
  }
  for (auto& c : next.components) {
    c.weight /= total;
  }
  return next;
}

}  // namespace ecm

void iterate(const DataMatrix& data, RunState& state, const StepFunction& step, int max_iter,
             double tol) {
  if (state.trace.empty()) {
    auto e = ecm::e_step(state.model, data);
    state.resp = std::move(e.resp);
    state.trace.push_back(e.loglik);
  }
  while (!state.converged && state.n_iter < max_iter) {
    MixtureModel next = step(data, state.resp, state.model);
    auto e = ecm::e_step(next, data);
    ++state.n_iter;
    const double prev = state.trace.back();
    state.model = std::move(next);
    state.resp = std::move(e.resp);
    state.trace.push_back(e.loglik);
    if (!std::isfinite(e.loglik)) {
      throw NonFiniteDensity("log-likelihood became non-finite");
    }
    if (e.loglik - prev < tol) {
      state.converged = true;
    }
  }
}

namespace {

Vector column_variances(const Matrix& y) {
  const Vector mean = y.colwise().mean();
  const Matrix centered = y.rowwise() - mean.transpose();
  return centered.array().square().colwise().sum().transpose() / static_cast<double>(y.rows());
}

Vector clamp_box(const Vector& v, const profile::Box& box) {
  return v.cwiseMax(box.lower).cwiseMin(box.upper);
}

Matrix noise_loadings(Philox& rng, Index p, int q) {
  Matrix l(p, q);
  for (int j = 0; j < q; ++j) {
    for (Index i = 0; i < p; ++i) {
      l(i, j) = 0.01 * rng.normal();
    }
  }
  return l;
}

constexpr std::uint64_t kKmeansStream = 0x6b6d65616e730000ULL;

}  // namespace

MixtureModel random_start(const DataMatrix& data, std::span<const int> factors,
                          std::uint64_t seed, std::uint64_t stream, const profile::Box& box) {
  const int K = static_cast<int>(factors.size());
  const Index p = data.p();
  Philox rng(seed, stream);
  const auto rows = rng.sample_without_replacement(static_cast<int>(data.n()), K);
  const Vector psi = clamp_box(column_variances(data.values()), box);
  MixtureModel model;
  for (int k = 0; k < K; ++k) {
    ComponentParams c;
    c.weight = 1.0 / K;
    c.mean = data.values().row(rows[static_cast<size_t>(k)]).transpose();
    c.uniquenesses = psi;
    c.loadings = noise_loadings(rng, p, factors[static_cast<size_t>(k)]);
    model.components.push_back(std::move(c));
  }
  return model;
}

Labels kmeans_labels(const Matrix& z, int k, std::uint64_t seed, int restarts) {
  const Index n = z.rows();
  Labels best;
  double best_sse = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    Philox rng(seed, kKmeansStream + static_cast<std::uint64_t>(r) + 1);
    const auto init = rng.sample_without_replacement(static_cast<int>(n), k);
    Matrix centers(k, z.cols());
    for (int j = 0; j < k; ++j) {
      centers.row(j) = z.row(init[static_cast<size_t>(j)]);
    }
    Labels labels(static_cast<size_t>(n), -1);
    double sse = 0.0;
    for (int it = 0; it < 100; ++it) {
      bool changed = false;
      sse = 0.0;
      for (Index i = 0; i < n; ++i) {
        Index arg = 0;
        const double d = (centers.rowwise() - z.row(i)).rowwise().squaredNorm().minCoeff(&arg);
        sse += d;
        if (labels[static_cast<size_t>(i)] != static_cast<int>(arg)) {
          labels[static_cast<size_t>(i)] = static_cast<int>(arg);
          changed = true;
        }
      }
      if (!changed) {
        break;
      }
      Matrix sums = Matrix::Zero(k, z.cols());
      std::vector<int> counts(static_cast<size_t>(k), 0);
      for (Index i = 0; i < n; ++i) {
        sums.row(labels[static_cast<size_t>(i)]) += z.row(i);
        ++counts[static_cast<size_t>(labels[static_cast<size_t>(i)])];
      }
      for (int j = 0; j < k; ++j) {
        if (counts[static_cast<size_t>(j)] > 0) {
          centers.row(j) = sums.row(j) / counts[static_cast<size_t>(j)];
        }
      }
    }
    if (sse < best_sse) {
      best_sse = sse;
      best = labels;
    }
  }
  return best;
}

MixtureModel kmeans_start(const DataMatrix& data, std::span<const int> factors,
                          std::uint64_t seed, const profile::Box& box) {
  const int K = static_cast<int>(factors.size());
  const Matrix& y = data.values();
  const Index n = y.rows();
  const Index p = y.cols();
  const Vector mean = y.colwise().mean();
  Vector sd = column_variances(y).array().sqrt();
  for (Index j = 0; j < p; ++j) {
    if (!(sd[j] > 0.0)) {
      sd[j] = 1.0;
    }
  }
  const Matrix z = (y.rowwise() - mean.transpose()).array().rowwise() / sd.transpose().array();
  const Labels labels = kmeans_labels(z, K, seed);

  Philox rng(seed, kKmeansStream);
  MixtureModel model;
  for (int k = 0; k < K; ++k) {
    std::vector<Index> members;
    for (Index i = 0; i < n; ++i) {
      if (labels[static_cast<size_t>(i)] == k) {
        members.push_back(i);
      }
    }
    const auto count = static_cast<double>(members.size());
    if (count < cluster_floor(factors[static_cast<size_t>(k)])) {
      throw EmptyCluster(k, count);
    }
    Matrix block(static_cast<Index>(members.size()), p);
    for (size_t r = 0; r < members.size(); ++r) {
      block.row(static_cast<Index>(r)) = y.row(members[r]);
    }
    ComponentParams c;
    c.weight = count / static_cast<double>(n);
    c.mean = block.colwise().mean().transpose();
    c.uniquenesses = clamp_box(column_variances(block), box);
    c.loadings = noise_loadings(rng, p, factors[static_cast<size_t>(k)]);
    model.components.push_back(std::move(c));
  }
  return model;
}

FitReport make_report(const DataMatrix& data, RunState state, const std::string& engine,
                      double seconds) {
  FitReport report;
  for (auto& c : state.model.components) {
    canonicalize_signs(c.loadings);
  }
  report.model = std::move(state.model);
  report.responsibilities = std::move(state.resp);
  report.loglik_trace = std::move(state.trace);
  report.loglik = report.loglik_trace.back();
  report.n_params = free_param_count(report.model);
  report.bic = bic(report.loglik, report.n_params, data.n());
  report.n_iter = state.n_iter;
  report.converged = state.converged;
  report.wall_time = seconds;
  report.hard_assignment = report.responsibilities.hard_assignment();
  report.engine = engine;
  return report;
}

FitReport fit_multistart(const DataMatrix& data, const FitConfig& config, const StepFunction& step,
                         const std::string& engine) {
  validate_config(config, data.n(), data.p());
  const auto t0 = std::chrono::steady_clock::now();
  const auto factors = resolve_factors(config);
  const int n_random = config.n_random_starts;
  const int n_starts = n_random + (config.use_kmeans_start ? 1 : 0);

  std::vector<std::optional<RunState>> states(static_cast<size_t>(n_starts));
  parallel_for(n_starts, config.threads, [&](int s) {
    try {
      RunState st;
      st.model = s < n_random ? random_start(data, factors, config.seed,
                                             static_cast<std::uint64_t>(s), config.box)
                              : kmeans_start(data, factors, config.seed, config.box);
      iterate(data, st, step, config.short_run_iters, config.tol);
      if (std::isfinite(st.trace.back())) {
        states[static_cast<size_t>(s)] = std::move(st);
      }
    } catch (const ConvergenceError&) {
      // degenerate start, discarded
    } catch (const linops::DegenerateWeights&) {
    }
  });

  std::vector<int> alive;
  for (int s = 0; s < n_starts; ++s) {
    if (states[static_cast<size_t>(s)]) {
      alive.push_back(s);
    }
  }
  if (alive.empty()) {
    throw AllStartsFailed("all " + std::to_string(n_starts) + " starts degenerated");
  }
  std::stable_sort(alive.begin(), alive.end(), [&](int a, int b) {
    return states[static_cast<size_t>(a)]->trace.back() > states[static_cast<size_t>(b)]->trace.back();
  });
  const int n_final = std::min<int>(config.n_finalists, static_cast<int>(alive.size()));
  std::vector<std::optional<RunState>> finals(static_cast<size_t>(n_final));
  parallel_for(n_final, config.threads, [&](int f) {
    RunState st = *states[static_cast<size_t>(alive[static_cast<size_t>(f)])];
    try {
      iterate(data, st, step, config.max_iter, config.tol);
      finals[static_cast<size_t>(f)] = std::move(st);
    } catch (const ConvergenceError&) {
    } catch (const linops::DegenerateWeights&) {
    }
  });

  int best = -1;
  for (int f = 0; f < n_final; ++f) {
    const auto& st = finals[static_cast<size_t>(f)];
    if (st && (best < 0 || st->trace.back() > finals[static_cast<size_t>(best)]->trace.back())) {
      best = f;
    }
  }
  if (best < 0) {
    throw AllStartsFailed("every finalist degenerated");
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return make_report(data, std::move(*finals[static_cast<size_t>(best)]), engine, seconds);
}

namespace {

StepFunction ecm_step(std::vector<int> factors, ecm::CmOptions options) {
  return [factors = std::move(factors), options](const DataMatrix& d, const Responsibilities& r,
                                                 const MixtureModel& m) {
    return ecm::cm_step(d, r, factors, m, options);
  };
}

}  // namespace

FitReport fit(const DataMatrix& data, const FitConfig& config) {
  return fit_multistart(data, config, ecm_step(resolve_factors(config), ecm::cm_options(config)),
                        "gmmfad");
}

FitReport fit_from(const DataMatrix& data, const MixtureModel& init, const FitConfig& config) {
  validate_config(config, data.n(), data.p());
  const auto t0 = std::chrono::steady_clock::now();
  auto options = ecm::cm_options(config);
  options.threads = config.threads;
  RunState st;
  st.model = init;
  iterate(data, st, ecm_step(resolve_factors(config), options), config.max_iter, config.tol);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return make_report(data, std::move(st), "gmmfad", seconds);
}

}  // namespace gmmfad
