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

#include "gmmfad/selection.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <sstream>

#include "gmmfad/io.hpp"
#include "gmmfad/parallel.hpp"

namespace gmmfad::select {

namespace {

constexpr double kBicTie = 1e-6;

GridRow row_from(const FitReport& r, int k, std::vector<int> factors, double seconds) {
  GridRow row;
  row.n_components = k;
  row.factors = std::move(factors);
  row.loglik = r.loglik;
  row.n_params = r.n_params;
  row.bic = r.bic;
  row.n_iter = r.n_iter;
  row.seconds = seconds;
  return row;
}

GridRow failed_row(int k, std::vector<int> factors, const std::string& what, double seconds) {
  GridRow row;
  row.n_components = k;
  row.factors = std::move(factors);
  row.loglik = -std::numeric_limits<double>::infinity();
  row.bic = std::numeric_limits<double>::infinity();
  row.seconds = seconds;
  row.failed = true;
  row.error = what;
  return row;
}

// q-vector comparison treats a common q as (q, ..., q).
std::vector<int> expand(const GridRow& r) {
  if (r.factors.size() == 1) {
    return std::vector<int>(static_cast<size_t>(r.n_components), r.factors.front());
  }
  return r.factors;
}

struct Cell {
  GridRow row;
  std::optional<FitReport> report;
};

template <typename Fit>
Cell run_cell(int k, std::vector<int> factors, Fit&& fit) {
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&t0]() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  try {
    FitReport r = fit();
    Cell c{row_from(r, k, factors, elapsed()), std::move(r)};
    return c;
  } catch (const ConvergenceError& e) {
    return Cell{failed_row(k, std::move(factors), e.what(), elapsed()), std::nullopt};
  } catch (const linops::DegenerateWeights& e) {
    return Cell{failed_row(k, std::move(factors), e.what(), elapsed()), std::nullopt};
  }
}

size_t argbest(const std::vector<GridRow>& table) {
  size_t best = 0;
  for (size_t i = 1; i < table.size(); ++i) {
    if (preferred(table[i], table[best])) {
      best = i;
    }
  }
  return best;
}

// Loadings for a neighbouring q: drop trailing columns or append zeros.
MixtureModel resize_factors(const MixtureModel& model, const std::vector<int>& qs) {
  MixtureModel out = model;
  for (size_t k = 0; k < out.components.size(); ++k) {
    auto& c = out.components[k];
    const Index want = qs[k];
    Matrix next = Matrix::Zero(c.dim(), want);
    const Index keep = std::min<Index>(want, c.loadings.cols());
    next.leftCols(keep) = c.loadings.leftCols(keep);
    c.loadings = std::move(next);
  }
  return out;
}

}  // namespace

SearchGrid resolve_grid(const SearchGrid& grid, Index n, Index p) {
  if (grid.k_values.empty()) {
    throw ValidationError("search grid has no K values");
  }
  for (int k : grid.k_values) {
    if (k < 1 || k > n) {
      throw ValidationError("K=" + std::to_string(k) + " outside [1, n]");
    }
  }
  SearchGrid out = grid;
  const int admissible = std::max(max_admissible_q(p), 0);
  out.q_max = std::min({grid.q_max, admissible, static_cast<int>(std::min(n, p)) - 1});
  out.q_min = std::max(grid.q_min, 0);
  if (out.q_min > out.q_max) {
    throw ValidationError("no admissible q in [" + std::to_string(grid.q_min) + ", " +
                          std::to_string(grid.q_max) + "] for p=" + std::to_string(p));
  }
  return out;
}

bool preferred(const GridRow& a, const GridRow& b) {
  if (a.failed != b.failed) {
    return !a.failed;
  }
  if (std::abs(a.bic - b.bic) > kBicTie) {
    return a.bic < b.bic;
  }
  if (a.n_params != b.n_params) {
    return a.n_params < b.n_params;
  }
  if (a.n_components != b.n_components) {
    return a.n_components < b.n_components;
  }
  return expand(a) < expand(b);
}

std::string q_spec(const std::vector<int>& factors) {
  std::string s;
  for (size_t i = 0; i < factors.size(); ++i) {
    s += (i ? ";" : "") + std::to_string(factors[i]);
  }
  return s;
}

SelectionResult select_common_q(const DataMatrix& data, const SearchGrid& grid_in) {
  const SearchGrid grid = resolve_grid(grid_in, data.n(), data.p());
  std::vector<std::pair<int, int>> cells;
  for (int k : grid.k_values) {
    for (int q = grid.q_min; q <= grid.q_max; ++q) {
      cells.emplace_back(k, q);
    }
  }
  std::vector<Cell> results(cells.size());
  parallel_for(static_cast<int>(cells.size()), grid.fit_config_template.threads, [&](int i) {
    const auto [k, q] = cells[static_cast<size_t>(i)];
    FitConfig config = grid.fit_config_template;
    config.n_components = k;
    config.factors = {q};
    config.threads = 1;
    results[static_cast<size_t>(i)] = run_cell(k, {q}, [&]() { return fit(data, config); });
  });

  SelectionResult out;
  for (const auto& c : results) {
    out.table.push_back(c.row);
  }
  out.best_row = argbest(out.table);
  auto& winner = results[out.best_row];
  if (!winner.report) {
    throw AllStartsFailed("every grid cell failed to fit");
  }
  out.best = std::move(*winner.report);
  return out;
}

SelectionResult select_per_cluster_q(const DataMatrix& data, const SearchGrid& grid_in) {
  if (grid_in.q_mode == QMode::kCommon) {
    return select_common_q(data, grid_in);
  }
  const SearchGrid grid = resolve_grid(grid_in, data.n(), data.p());
  SelectionResult out = select_common_q(data, grid);
  const int k = out.table[out.best_row].n_components;
  std::vector<int> current = expand(out.table[out.best_row]);
  GridRow current_row = out.table[out.best_row];
  size_t current_index = out.best_row;

  std::set<std::vector<int>> visited{current};
  const int q_floor = 0;
  while (true) {
    std::vector<std::vector<int>> neighbours;
    for (int c = 0; c < k; ++c) {
      for (int delta : {-1, 1}) {
        auto cand = current;
        cand[static_cast<size_t>(c)] += delta;
        const int qc = cand[static_cast<size_t>(c)];
        if (qc < q_floor || qc > grid.q_max || visited.count(cand) > 0) {
          continue;
        }
        visited.insert(cand);
        neighbours.push_back(std::move(cand));
      }
    }
    if (neighbours.empty()) {
      break;
    }
    std::vector<Cell> results(neighbours.size());
    const MixtureModel base = out.best.model;
    parallel_for(static_cast<int>(neighbours.size()), grid.fit_config_template.threads,
                 [&](int i) {
                   const auto& qs = neighbours[static_cast<size_t>(i)];
                   FitConfig config = grid.fit_config_template;
                   config.n_components = k;
                   config.factors = qs;
                   config.threads = 1;
                   results[static_cast<size_t>(i)] = run_cell(k, qs, [&]() {
                     return fit_from(data, resize_factors(base, qs), config);
                   });
                 });
    std::optional<size_t> move;
    const size_t offset = out.table.size();
    for (size_t i = 0; i < results.size(); ++i) {
      out.table.push_back(results[i].row);
      const GridRow& incumbent = move ? results[*move].row : current_row;
      if (preferred(results[i].row, incumbent)) {
        move = i;
      }
    }
    if (!move) {
      break;
    }
    current = neighbours[*move];
    current_row = results[*move].row;
    current_index = offset + *move;
    out.best = std::move(*results[*move].report);
  }
  out.best_row = current_index;
  return out;
}

std::string table_csv(const std::vector<GridRow>& table) {
  std::ostringstream os;
  os << "K,q_spec,loglik,n_params,bic,n_iter,seconds\n";
  for (const auto& r : table) {
    os << r.n_components << ',' << q_spec(r.factors) << ',' << io::format_double(r.loglik) << ','
       << r.n_params << ',' << io::format_double(r.bic) << ',' << r.n_iter << ','
       << io::format_double(r.seconds) << '\n';
  }
  return os.str();
}

}  // namespace gmmfad::select
