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

#include "gmmfad/simgen.hpp"
#include "helpers.hpp"

using namespace gmmfad;
using namespace gmmfad::sim;

namespace {

Matrix sample_cov(const Matrix& y) {
  const Matrix c = y.rowwise() - y.colwise().mean();
  return c.transpose() * c / static_cast<double>(y.rows());
}

}  // namespace

TEST_CASE("truth is deterministic") {
  SimSpec spec;
  spec.seed = 9;
  const auto a = draw_truth(spec);
  const auto b = draw_truth(spec);
  for (size_t k = 0; k < a.components.size(); ++k) {
    CHECK(a.components[k].mean == b.components[k].mean);
    CHECK(a.components[k].loadings == b.components[k].loadings);
    CHECK(a.components[k].uniquenesses == b.components[k].uniquenesses);
    CHECK(a.components[k].weight == b.components[k].weight);
  }
  const auto da = sample_dataset(a, 50, 3);
  const auto db = sample_dataset(b, 50, 3);
  CHECK(da.values() == db.values());
  CHECK(*da.labels() == *db.labels());
}

TEST_CASE("weights lie on the simplex") {
  for (std::uint64_t s = 0; s < 1000; ++s) {
    SimSpec spec;
    spec.n_components = 1 + static_cast<int>(s % 5);
    spec.n = 100;
    spec.seed = s;
    const auto m = draw_truth(spec);
    double total = 0.0;
    for (const auto& c : m.components) {
      total += c.weight;
      CHECK(c.weight > 0.0);
      CHECK(c.uniquenesses.minCoeff() >= 0.2);
      CHECK(c.uniquenesses.maxCoeff() <= 0.8);
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
    if (spec.n_components == 1) {
      CHECK(m.components[0].weight == 1.0);
    }
  }
}

TEST_CASE("spec validation") {
  SimSpec spec;
  spec.factors = {7};
  CHECK_THROWS_AS(validate(spec), ValidationError);
  spec.factors = {2};
  spec.n = 7;
  CHECK_THROWS_AS(validate(spec), ValidationError);
  spec.n = 300;
  spec.factors = {2, 2, 2};
  CHECK_THROWS_AS(validate(spec), ValidationError);
  spec.factors = {3, 1};
  CHECK(resolve_factors(spec) == std::vector<int>{3, 1});
}

TEST_CASE("standard normal samples") {
  MixtureModel m;
  ComponentParams c;
  c.weight = 1.0;
  c.mean = Vector::Zero(4);
  c.loadings = Matrix::Zero(4, 1);
  c.uniquenesses = Vector::Ones(4);
  m.components.push_back(c);
  const auto d = sample_dataset(m, 100000, 1);
  CHECK(d.values().colwise().mean().cwiseAbs().maxCoeff() < 0.05);
  CHECK((sample_cov(d.values()) - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("component covariance and label frequencies") {
  SimSpec spec;
  spec.p = 6;
  spec.n_components = 2;
  spec.factors = {2};
  spec.n = 100000;
  spec.seed = 4;
  const auto m = draw_truth(spec);
  const auto d = sample_dataset(m, spec.n, 4);
  const auto& labels = *d.labels();
  for (int k = 0; k < 2; ++k) {
    std::vector<Index> rows;
    for (Index i = 0; i < spec.n; ++i) {
      if (labels[static_cast<size_t>(i)] == k) {
        rows.push_back(i);
      }
    }
    Matrix yk(static_cast<Index>(rows.size()), 6);
    for (size_t r = 0; r < rows.size(); ++r) {
      yk.row(static_cast<Index>(r)) = d.values().row(rows[r]);
    }
    const auto& c = m.components[static_cast<size_t>(k)];
    CHECK((sample_cov(yk) - testing::dense_covariance(c)).cwiseAbs().maxCoeff() < 0.1);
    const double freq = static_cast<double>(rows.size()) / static_cast<double>(spec.n);
    CHECK(std::abs(freq - c.weight) < 3.0 / std::sqrt(static_cast<double>(spec.n)));
    for (int l : labels) {
      CHECK((l == 0 || l == 1));
    }
  }
}

TEST_CASE("separation regimes order the Bayes error") {
  double high = 0.0;
  double low = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    SimSpec spec;
    spec.seed = s;
    spec.separation = kHighSeparation;
    high += bayes_error_rate(draw_truth(spec), 20000, s);
    spec.separation = kLowSeparation;
    low += bayes_error_rate(draw_truth(spec), 20000, s);
  }
  CHECK(high < low);
  CHECK(high / 10.0 < 0.003);
  CHECK(low / 10.0 > 0.003);
}
