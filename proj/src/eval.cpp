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

#include "gmmfad/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace gmmfad::eval {

namespace {

double choose2(double x) { return 0.5 * x * (x - 1.0); }

std::map<int, int> dense_ids(std::span<const int> labels) {
  std::map<int, int> ids;
  for (int l : labels) {
    ids.emplace(l, 0);
  }
  int next = 0;
  for (auto& [label, id] : ids) {
    id = next++;
  }
  return ids;
}

void check_lengths(size_t a, size_t b) {
  if (a != b) {
    throw DimensionMismatch("label vectors differ in length (" + std::to_string(a) + " vs " +
                            std::to_string(b) + ")");
  }
}

}  // namespace

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  check_lengths(a.size(), b.size());
  const auto n = static_cast<double>(a.size());
  if (a.size() < 2) {
    return 1.0;
  }
  const auto ia = dense_ids(a);
  const auto ib = dense_ids(b);
  Matrix table = Matrix::Zero(static_cast<Index>(ia.size()), static_cast<Index>(ib.size()));
  for (size_t i = 0; i < a.size(); ++i) {
    table(ia.at(a[i]), ib.at(b[i])) += 1.0;
  }
  double index = 0.0;
  for (Index r = 0; r < table.rows(); ++r) {
    for (Index c = 0; c < table.cols(); ++c) {
      index += choose2(table(r, c));
    }
  }
  double sum_a = 0.0;
  for (Index r = 0; r < table.rows(); ++r) {
    sum_a += choose2(table.row(r).sum());
  }
  double sum_b = 0.0;
  for (Index c = 0; c < table.cols(); ++c) {
    sum_b += choose2(table.col(c).sum());
  }
  const double expected = sum_a * sum_b / choose2(n);
  const double max_index = 0.5 * (sum_a + sum_b);
  const double denom = max_index - expected;
  if (denom == 0.0) {
    // Both partitions trivial in the same way (all-in-one or all-singletons).
    return index == expected ? 1.0 : 0.0;
  }
  return (index - expected) / denom;
}

ConfusionMetrics confusion_metrics(std::span<const int> pred, std::span<const int> truth,
                                   int positive_class) {
  check_lengths(pred.size(), truth.size());
  if (pred.empty()) {
    throw ValidationError("confusion_metrics: empty labels");
  }
  const std::set<int> clusters(pred.begin(), pred.end());
  if (clusters.size() > 2) {
    throw ValidationError("confusion_metrics: prediction has " + std::to_string(clusters.size()) +
                          " clusters, expected at most 2");
  }
  const std::set<int> classes(truth.begin(), truth.end());
  if (classes.size() > 2) {
    throw ValidationError("confusion_metrics: truth is not binary");
  }

  ConfusionMetrics best;
  bool have = false;
  for (int candidate : clusters) {
    ConfusionMetrics m;
    m.positive_cluster = candidate;
    for (size_t i = 0; i < pred.size(); ++i) {
      const bool predicted_pos = pred[i] == candidate;
      const bool actual_pos = truth[i] == positive_class;
      if (predicted_pos && actual_pos) {
        ++m.tp;
      } else if (predicted_pos) {
        ++m.fp;
      } else if (actual_pos) {
        ++m.fn;
      } else {
        ++m.tn;
      }
    }
    const auto n = static_cast<double>(pred.size());
    m.accuracy = static_cast<double>(m.tp + m.tn) / n;
    m.sensitivity = m.tp + m.fn > 0 ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn) : 0.0;
    m.specificity = m.tn + m.fp > 0 ? static_cast<double>(m.tn) / static_cast<double>(m.tn + m.fp) : 0.0;
    const double pe = (static_cast<double>(m.tp + m.fp) * static_cast<double>(m.tp + m.fn) +
                       static_cast<double>(m.tn + m.fn) * static_cast<double>(m.tn + m.fp)) /
                      (n * n);
    m.kappa = pe < 1.0 ? (m.accuracy - pe) / (1.0 - pe) : (m.accuracy == 1.0 ? 1.0 : 0.0);
    if (!have || m.accuracy > best.accuracy) {
      best = m;
      have = true;
    }
  }
  return best;
}

double relative_frobenius(const Matrix& est, const Matrix& truth) {
  if (est.rows() != truth.rows() || est.cols() != truth.cols()) {
    throw DimensionMismatch("relative_frobenius: shapes differ");
  }
  const double denom = truth.norm();
  if (denom == 0.0) {
    throw ValidationError("relative_frobenius: truth has zero norm");
  }
  return (est - truth).norm() / denom;
}

double relative_frobenius_outer(const Matrix& est, const Matrix& truth) {
  if (est.rows() != truth.rows()) {
    throw DimensionMismatch("relative_frobenius_outer: row counts differ");
  }
  // ||A A^T - B B^T||^2 = ||A^T A||^2 + ||B^T B||^2 - 2 ||A^T B||^2.
  const double aa = (est.transpose() * est).squaredNorm();
  const double bb = (truth.transpose() * truth).squaredNorm();
  const double ab = (est.transpose() * truth).squaredNorm();
  if (bb == 0.0) {
    throw ValidationError("relative_frobenius_outer: truth has zero norm");
  }
  return std::sqrt(std::max(aa + bb - 2.0 * ab, 0.0)) / std::sqrt(bb);
}

std::vector<int> match_clusters(std::span<const int> est, std::span<const int> truth) {
  check_lengths(est.size(), truth.size());
  if (est.empty()) {
    return {};
  }
  const int ke = *std::max_element(est.begin(), est.end()) + 1;
  const int kt = *std::max_element(truth.begin(), truth.end()) + 1;
  if (*std::min_element(est.begin(), est.end()) < 0 ||
      *std::min_element(truth.begin(), truth.end()) < 0) {
    throw ValidationError("match_clusters: labels must be nonnegative");
  }
  if (ke != kt) {
    throw ValidationError("match_clusters: " + std::to_string(ke) + " estimated vs " +
                          std::to_string(kt) + " true clusters");
  }
  const int k = ke;
  std::vector<std::vector<double>> overlap(static_cast<size_t>(k),
                                           std::vector<double>(static_cast<size_t>(k), 0.0));
  for (size_t i = 0; i < est.size(); ++i) {
    overlap[static_cast<size_t>(est[i])][static_cast<size_t>(truth[i])] += 1.0;
  }

  // Hungarian algorithm (potentials form) minimising -overlap; 1-based.
  const double inf = std::numeric_limits<double>::infinity();
  const auto K = static_cast<size_t>(k);
  std::vector<double> u(K + 1, 0.0);
  std::vector<double> v(K + 1, 0.0);
  std::vector<size_t> match(K + 1, 0);  // match[col] = row
  std::vector<size_t> way(K + 1, 0);
  for (size_t row = 1; row <= K; ++row) {
    match[0] = row;
    size_t col0 = 0;
    std::vector<double> minv(K + 1, inf);
    std::vector<bool> used(K + 1, false);
    do {
      used[col0] = true;
      const size_t r0 = match[col0];
      double delta = inf;
      size_t col1 = 0;
      for (size_t col = 1; col <= K; ++col) {
        if (used[col]) {
          continue;
        }
        const double cur = -overlap[r0 - 1][col - 1] - u[r0] - v[col];
        if (cur < minv[col]) {
          minv[col] = cur;
          way[col] = col0;
        }
        if (minv[col] < delta) {
          delta = minv[col];
          col1 = col;
        }
      }
      for (size_t col = 0; col <= K; ++col) {
        if (used[col]) {
          u[match[col]] += delta;
          v[col] -= delta;
        } else {
          minv[col] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const size_t col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<int> perm(K, 0);
  for (size_t col = 1; col <= K; ++col) {
    perm[match[col] - 1] = static_cast<int>(col - 1);
  }
  return perm;
}

Labels relabel(std::span<const int> labels, std::span<const int> perm) {
  Labels out;
  out.reserve(labels.size());
  for (int l : labels) {
    if (l < 0 || static_cast<size_t>(l) >= perm.size()) {
      throw ValidationError("relabel: label outside permutation range");
    }
    out.push_back(perm[static_cast<size_t>(l)]);
  }
  return out;
}

}  // namespace gmmfad::eval
