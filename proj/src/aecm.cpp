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

#include "gmmfad/aecm.hpp"

#include <chrono>

namespace gmmfad::aecm {

namespace {

std::vector<double> column_sums(const Matrix& gamma, int q) {
  std::vector<double> sums(static_cast<size_t>(gamma.cols()), 0.0);
  for (Index k = 0; k < gamma.cols(); ++k) {
    double s = 0.0;
    for (Index i = 0; i < gamma.rows(); ++i) {
      s += gamma(i, k);
    }
    if (s < cluster_floor(q)) {
      throw EmptyCluster(static_cast<int>(k), s);
    }
    sums[static_cast<size_t>(k)] = s;
  }
  return sums;
}

int common_q(const FitConfig& config) {
  const auto qs = resolve_factors(config);
  for (int q : qs) {
    if (q != qs.front()) {
      throw ValidationError("the AECM baseline requires a common number of factors");
    }
  }
  return qs.front();
}

void check_dimension(const FitConfig& config, Index p) {
  if (p > config.aecm_p_limit && !config.force) {
    throw DimensionTooLarge("AECM baseline is impractical at p=" + std::to_string(p) +
                            " (limit " + std::to_string(config.aecm_p_limit) +
                            "); pass force to override");
  }
}

}  // namespace

MixtureModel aecm_step(const DataMatrix& data, const Responsibilities& resp, int q,
                       const MixtureModel& current, const profile::Box& box) {
  const Matrix& y = data.values();
  const Index n = data.n();
  const Index p = data.p();
  const int K = current.n_components();
  if (resp.gamma.rows() != n || resp.gamma.cols() != K) {
    throw DimensionMismatch("aecm_step: responsibilities and model disagree");
  }

  // Cycle 1: weights and means.
  MixtureModel mid = current;
  {
    const auto sums = column_sums(resp.gamma, q);
    for (int k = 0; k < K; ++k) {
      auto& c = mid.components[static_cast<size_t>(k)];
      const double w = sums[static_cast<size_t>(k)];
      c.weight = w / static_cast<double>(n);
      c.mean = (y.transpose() * resp.gamma.col(k)) / w;
    }
    double total = 0.0;
    for (const auto& c : mid.components) {
      total += c.weight;
    }
    for (auto& c : mid.components) {
      c.weight /= total;
    }
  }

  // Cycle 2: factor-augmented EM step for loadings and uniquenesses.
  const auto e2 = ecm::e_step(mid, data);
  const auto sums = column_sums(e2.resp.gamma, q);
  MixtureModel next = mid;
  for (int k = 0; k < K; ++k) {
    auto& c = next.components[static_cast<size_t>(k)];
    const double w = sums[static_cast<size_t>(k)];
    const Vector sw = (e2.resp.gamma.col(k) / w).array().sqrt();
    const Matrix centered = (y.rowwise() - c.mean.transpose()).array().colwise() * sw.array();
    linops::dense_guard::note_square(p);
    const Matrix scatter = centered.transpose() * centered;

    const Matrix& lam = c.loadings;
    const Vector inv_psi = c.uniquenesses.cwiseInverse();
    const Matrix psi_inv_lam = inv_psi.asDiagonal() * lam;
    Matrix cap = Matrix::Identity(q, q);
    cap.noalias() += lam.transpose() * psi_inv_lam;
    const Matrix beta = cap.llt().solve(psi_inv_lam.transpose());  // q x p
    const Matrix beta_s = beta * scatter;                           // q x p
    Matrix inner = Matrix::Identity(q, q);
    inner.noalias() += beta_s * beta.transpose();
    inner.noalias() -= beta * lam;
    const Matrix inner_sym = 0.5 * (inner + inner.transpose());
    const Matrix lam_new = inner_sym.llt().solve(beta_s).transpose();  // p x q
    Vector psi_new = scatter.diagonal();
    psi_new -= (lam_new.array() * beta_s.transpose().array()).rowwise().sum().matrix();
    c.loadings = lam_new;
    c.uniquenesses = psi_new.cwiseMax(box.lower).cwiseMin(box.upper);
  }
  return next;
}

FitReport fit_baseline_aecm(const DataMatrix& data, const FitConfig& config) {
  check_dimension(config, data.p());
  const int q = common_q(config);
  const profile::Box box = config.box;
  StepFunction step = [q, box](const DataMatrix& d, const Responsibilities& r,
                               const MixtureModel& m) { return aecm_step(d, r, q, m, box); };
  return fit_multistart(data, config, step, "aecm");
}

FitReport fit_from(const DataMatrix& data, const MixtureModel& init, const FitConfig& config) {
  check_dimension(config, data.p());
  validate_config(config, data.n(), data.p());
  const int q = common_q(config);
  const profile::Box box = config.box;
  const auto t0 = std::chrono::steady_clock::now();
  RunState st;
  st.model = init;
  iterate(
      data, st,
      [q, box](const DataMatrix& d, const Responsibilities& r, const MixtureModel& m) {
        return aecm_step(d, r, q, m, box);
      },
      config.max_iter, config.tol);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return make_report(data, std::move(st), "aecm", seconds);
}

}  // namespace gmmfad::aecm
