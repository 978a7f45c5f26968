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

#include <string>
#include <vector>

#include "gmmfad/ecm.hpp"

namespace gmmfad::select {

enum class QMode { kCommon, kPerCluster };

struct SearchGrid {
  std::vector<int> k_values{1, 2};
  QMode q_mode = QMode::kCommon;
  int q_min = 1;
  int q_max = 1;
  /// Template for every cell; n_components and factors are overwritten.
  FitConfig fit_config_template;
};

/// One fitted (K, q) cell. Failed cells carry bic = +inf and the message.
struct GridRow {
  int n_components = 0;
  std::vector<int> factors;  // length 1 for common q
  double loglik = 0.0;
  long long n_params = 0;
  double bic = 0.0;
  int n_iter = 0;
  double seconds = 0.0;
  bool failed = false;
  std::string error;
};

struct SelectionResult {
  FitReport best;
  std::vector<GridRow> table;  // grid order, then search order
  size_t best_row = 0;
};

/// q_max clamped to the largest admissible value for p. Throws
/// ValidationError for an empty grid or q_min > q_max.
SearchGrid resolve_grid(const SearchGrid& grid, Index n, Index p);

/// Strict preference: BIC lower by more than 1e-6, otherwise fewer
/// parameters, then smaller K, then the lexicographically smaller q-vector.
bool preferred(const GridRow& a, const GridRow& b);

/// "3" for common q, "3;1" for a q-vector.
std::string q_spec(const std::vector<int>& factors);

/// Fits every (K, q) cell of the grid with the multistart hybrid ECM.
SelectionResult select_common_q(const DataMatrix& data, const SearchGrid& grid);

/// Starts from the common-q winner and repeatedly moves one cluster's q by
/// +-1 (within [0, q_max]) while BIC improves; neighbours are refitted from
/// the current model with a loading column appended (zero) or dropped. The
/// table holds the common-q grid followed by every visited q-vector.
SelectionResult select_per_cluster_q(const DataMatrix& data, const SearchGrid& grid);

/// Header plus one line per row: K,q_spec,loglik,n_params,bic,n_iter,seconds.
std::string table_csv(const std::vector<GridRow>& table);

}  // namespace gmmfad::select
