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

#include <span>
#include <vector>

#include "gmmfad/model.hpp"

namespace gmmfad::eval {

/// Hubert-Arabie adjusted Rand index. Labels may be any integers.
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

struct ConfusionMetrics {
  double accuracy = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double kappa = 0.0;
  long tp = 0;
  long fn = 0;
  long tn = 0;
  long fp = 0;
  int positive_cluster = -1;  // predicted cluster mapped to the positive class
};

/// 2x2 rates for a two-cluster prediction against binary truth. The cluster
/// mapped to `positive_class` is whichever gives the higher accuracy (the
/// first candidate on ties). Throws ValidationError for more than two
/// predicted clusters or non-binary truth.
ConfusionMetrics confusion_metrics(std::span<const int> pred, std::span<const int> truth,
                                   int positive_class);

/// ||est - truth||_F / ||truth||_F.
double relative_frobenius(const Matrix& est, const Matrix& truth);

/// Relative Frobenius distance between est est^T and truth truth^T computed
/// from q x q cross products only.
double relative_frobenius_outer(const Matrix& est_loadings, const Matrix& true_loadings);

/// perm[e] = truth label matched to estimated label e, maximising total
/// overlap (Hungarian algorithm). Labels must be 0..K-1 on both sides.
std::vector<int> match_clusters(std::span<const int> est, std::span<const int> truth);

/// Applies perm to every label.
Labels relabel(std::span<const int> labels, std::span<const int> perm);

}  // namespace gmmfad::eval
