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

#include "gmmfad/simgen.hpp"

#include <algorithm>
#include <cmath>

#include "gmmfad/ecm.hpp"
#include "gmmfad/rng.hpp"

namespace gmmfad::sim {

namespace {
constexpr std::uint64_t kTruthStream = 0x7472757468ULL;   // "truth"
constexpr std::uint64_t kSampleStream = 0x73616d706cULL;  // "sampl"
constexpr std::uint64_t kBayesStream = 0x6261796573ULL;   // "bayes"
constexpr double kWeightFloor = 0.05;
}  // namespace

std::vector<int> resolve_factors(const SimSpec& spec) {
  if (spec.n_components < 1) {
    throw ValidationError("simulation needs at least one component");
  }
  if (spec.factors.size() == 1) {
    return std::vector<int>(static_cast<size_t>(spec.n_components), spec.factors.front());
  }
  if (static_cast<int>(spec.factors.size()) != spec.n_components) {
    throw ValidationError("factor list length differs from component count");
  }
  return spec.factors;
}

void validate(const SimSpec& spec) {
  const auto qs = resolve_factors(spec);
  if (spec.p < 1) {
    throw ValidationError("simulation dimension must be positive");
  }
  const int qmax = *std::max_element(qs.begin(), qs.end());
  if (spec.n < static_cast<Index>(spec.n_components) * (qmax + 2)) {
    throw ValidationError("simulation needs n >= K (max q + 2)");
  }
  const int admissible = max_admissible_q(spec.p);
  for (int q : qs) {
    if (q < 0 || (q > 0 && q > admissible)) {
      throw ValidationError("factor count " + std::to_string(q) + " not admissible at p=" +
                            std::to_string(spec.p));
    }
  }
  if (!(spec.separation >= 0.0) || !std::isfinite(spec.separation)) {
    throw ValidationError("separation must be finite and nonnegative");
  }
}

MixtureModel draw_truth(const SimSpec& spec) {
  validate(spec);
  const auto qs = resolve_factors(spec);
  const Index p = spec.p;
  Philox rng(spec.seed, kTruthStream);

  MixtureModel model;
  std::vector<double> weights;
  for (int k = 0; k < spec.n_components; ++k) {
    ComponentParams c;
    c.mean.resize(p);
    for (Index j = 0; j < p; ++j) {
      c.mean[j] = spec.separation * rng.normal();
    }
    const int q = qs[static_cast<size_t>(k)];
    c.loadings.resize(p, q);
    for (int l = 0; l < q; ++l) {
      for (Index j = 0; j < p; ++j) {
        c.loadings(j, l) = rng.normal();
      }
    }
    c.uniquenesses.resize(p);
    for (Index j = 0; j < p; ++j) {
      c.uniquenesses[j] = rng.uniform(0.2, 0.8);
    }
    weights.push_back(std::abs(rng.normal()));
    model.components.push_back(std::move(c));
  }

  double total = 0.0;
  for (double w : weights) {
    total += w;
  }
  double floored = 0.0;
  for (double& w : weights) {
    w = std::max(w / total, kWeightFloor);
    floored += w;
  }
  for (size_t k = 0; k < weights.size(); ++k) {
    model.components[k].weight = weights[k] / floored;
  }
  return model;
}

namespace {

int draw_component(Philox& rng, const MixtureModel& model) {
  const double u = rng.uniform();
  double cum = 0.0;
  const int K = model.n_components();
  for (int k = 0; k < K - 1; ++k) {
    cum += model.components[static_cast<size_t>(k)].weight;
    if (u < cum) {
      return k;
    }
  }
  return K - 1;
}

Vector draw_point(Philox& rng, const ComponentParams& c) {
  const Index p = c.dim();
  const int q = c.n_factors();
  Vector x(q);
  for (int l = 0; l < q; ++l) {
    x[l] = rng.normal();
  }
  Vector y = c.mean;
  if (q > 0) {
    y.noalias() += c.loadings * x;
  }
  for (Index j = 0; j < p; ++j) {
    y[j] += std::sqrt(c.uniquenesses[j]) * rng.normal();
  }
  return y;
}

}  // namespace

DataMatrix sample_dataset(const MixtureModel& model, Index n, std::uint64_t seed) {
  validate(model);
  const Index p = model.dim();
  Philox rng(seed, kSampleStream);
  Matrix values(n, p);
  Labels labels(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const int k = draw_component(rng, model);
    labels[static_cast<size_t>(i)] = k;
    values.row(i) = draw_point(rng, model.components[static_cast<size_t>(k)]).transpose();
  }
  return DataMatrix(std::move(values), std::move(labels));
}

double bayes_error_rate(const MixtureModel& model, Index n_mc, std::uint64_t seed) {
  validate(model);
  const Index p = model.dim();
  Philox rng(seed, kBayesStream);
  Matrix values(n_mc, p);
  Labels labels(static_cast<size_t>(n_mc));
  for (Index i = 0; i < n_mc; ++i) {
    const int k = draw_component(rng, model);
    labels[static_cast<size_t>(i)] = k;
    values.row(i) = draw_point(rng, model.components[static_cast<size_t>(k)]).transpose();
  }
  const DataMatrix data(std::move(values));
  const auto e = ecm::e_step(model, data);
  const Labels pred = e.resp.hard_assignment();
  Index wrong = 0;
  for (Index i = 0; i < n_mc; ++i) {
    wrong += pred[static_cast<size_t>(i)] != labels[static_cast<size_t>(i)] ? 1 : 0;
  }
  return static_cast<double>(wrong) / static_cast<double>(n_mc);
}

}  // namespace gmmfad::sim
