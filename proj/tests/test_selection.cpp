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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <limits>

#include "gmmfad/selection.hpp"
#include "helpers.hpp"

using namespace gmmfad;
using namespace gmmfad::select;

namespace {

SearchGrid small_grid(std::vector<int> ks, int q_min, int q_max, int threads = 1) {
  SearchGrid g;
  g.k_values = std::move(ks);
  g.q_min = q_min;
  g.q_max = q_max;
  g.fit_config_template.n_random_starts = 4;
  g.fit_config_template.seed = 3;
  g.fit_config_template.threads = threads;
  return g;
}

GridRow row(int k, std::vector<int> q, double bic, long long params, bool failed = false) {
  GridRow r;
  r.n_components = k;
  r.factors = std::move(q);
  r.bic = bic;
  r.n_params = params;
  r.failed = failed;
  return r;
}

double min_bic(const std::vector<GridRow>& table) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& r : table) {
    m = std::min(m, r.bic);
  }
  return m;
}

}  // namespace

TEST_CASE("grid resolution") {
  auto g = resolve_grid(small_grid({1, 2}, 1, 25), 569, 30);
  CHECK(g.q_max == 22);
  g = resolve_grid(small_grid({1}, 1, 4), 5, 10);
  CHECK(g.q_max == 4);
  g = resolve_grid(small_grid({1}, 1, 9), 5, 10);
  CHECK(g.q_max == 4);
  CHECK_THROWS_AS(resolve_grid(small_grid({1}, 3, 2), 100, 10), ValidationError);
  CHECK_THROWS_AS(resolve_grid(small_grid({}, 1, 2), 100, 10), ValidationError);
}

TEST_CASE("ordering of candidate rows") {
  CHECK(preferred(row(2, {2}, 100.0, 50), row(2, {3}, 101.0, 40)));
  CHECK(preferred(row(2, {3}, 100.0, 40), row(2, {2}, 100.0, 50)));
  CHECK(preferred(row(1, {3}, 100.0, 40), row(2, {2}, 100.0, 40)));
  CHECK(preferred(row(2, {2, 3}, 100.0, 40), row(2, {3, 2}, 100.0, 40)));
  CHECK(preferred(row(2, {2}, 1e9, 50), row(1, {1}, 1.0, 5, true)));
  CHECK(!preferred(row(2, {2}, 100.0, 50), row(2, {2}, 100.0, 50)));
  CHECK(q_spec({3}) == "3");
  CHECK(q_spec({3, 1}) == "3;1");
}

TEST_CASE("single cell equals a direct fit") {
  const auto data = testing::simulated(200, 8, 2, {1}, 11);
  const auto grid = small_grid({2}, 1, 1);
  const auto sel = select_common_q(data, grid);
  REQUIRE(sel.table.size() == 1);
  FitConfig c = grid.fit_config_template;
  c.n_components = 2;
  c.factors = {1};
  const auto direct = fit(data, c);
  CHECK(sel.best.loglik == direct.loglik);
  CHECK(sel.best.bic == sel.table[0].bic);
}

TEST_CASE("common q selection picks the table minimum") {
  const auto data = testing::simulated(300, 10, 2, {2}, 12);
  const auto sel = select_common_q(data, small_grid({1, 2, 3}, 1, 3));
  CHECK(sel.table.size() == 9);
  CHECK(sel.best.bic == min_bic(sel.table));
  CHECK(sel.table[sel.best_row].bic == sel.best.bic);
  CHECK(sel.best.model.components.size() == 2);
  const auto csv = table_csv(sel.table);
  CHECK(csv.rfind("K,q_spec,loglik,n_params,bic,n_iter,seconds\n", 0) == 0);
}

TEST_CASE("selection is deterministic across thread counts") {
  const auto data = testing::simulated(200, 8, 2, {1}, 13);
  const auto a = select_common_q(data, small_grid({1, 2}, 1, 2, 1));
  const auto b = select_common_q(data, small_grid({1, 2}, 1, 2, 4));
  REQUIRE(a.table.size() == b.table.size());
  for (size_t i = 0; i < a.table.size(); ++i) {
    CHECK(a.table[i].bic == b.table[i].bic);
  }
  CHECK(a.best.loglik == b.best.loglik);
}

TEST_CASE("per-cluster search in common mode matches the common search") {
  const auto data = testing::simulated(200, 8, 2, {1}, 14);
  const auto grid = small_grid({2}, 1, 2);
  const auto a = select_common_q(data, grid);
  const auto b = select_per_cluster_q(data, grid);
  CHECK(a.best.bic == b.best.bic);
  CHECK(a.table.size() == b.table.size());
}

TEST_CASE("per-cluster search never loses to the common grid") {
  const auto data = testing::simulated(400, 10, 2, {3, 1}, 15);
  auto grid = small_grid({2}, 1, 4);
  const auto common = select_common_q(data, grid);
  grid.q_mode = QMode::kPerCluster;
  const auto per = select_per_cluster_q(data, grid);
  CHECK(per.best.bic <= common.best.bic + 1e-9);
  CHECK(per.best.bic == min_bic(per.table));
  CHECK(per.table.size() > common.table.size());
  CHECK(per.table[per.best_row].factors.size() == 2);
}

TEST_CASE("a larger q started from a smaller fit does not lose likelihood") {
  const auto data = testing::simulated(300, 10, 2, {2}, 16);
  FitConfig c;
  c.n_components = 2;
  c.factors = {1};
  c.n_random_starts = 4;
  const auto small = fit(data, c);
  MixtureModel grown = small.model;
  for (auto& comp : grown.components) {
    Matrix l = Matrix::Zero(comp.loadings.rows(), 2);
    l.leftCols(1) = comp.loadings;
    comp.loadings = l;
  }
  c.factors = {2};
  const auto big = fit_from(data, grown, c);
  CHECK(big.loglik >= small.loglik - 1e-6);
}
