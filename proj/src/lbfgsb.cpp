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

#include "gmmfad/lbfgsb.hpp"

#include <cmath>
#include <deque>

namespace gmmfad::opt {

namespace {

Vector clamp(const Vector& x, const Vector& lo, const Vector& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

// 1 where the variable is free to move, 0 where it is pinned at a bound by
// the gradient sign.
Vector free_mask(const Vector& x, const Vector& g, const Vector& lo, const Vector& hi) {
  Vector mask = Vector::Ones(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    const double span = 1e-12 * std::max(1.0, std::abs(x[i]));
    if ((x[i] <= lo[i] + span && g[i] > 0.0) || (x[i] >= hi[i] - span && g[i] < 0.0)) {
      mask[i] = 0.0;
    }
  }
  return mask;
}

struct Pair {
  Vector s;
  Vector y;
};

Vector two_loop(const std::deque<Pair>& history, const Vector& g, const Vector& mask) {
  Vector q = g.cwiseProduct(mask);
  const size_t m = history.size();
  std::vector<double> alpha(m, 0.0);
  std::vector<double> rho(m, 0.0);
  double gamma = 1.0;
  bool have_scale = false;
  for (size_t k = m; k-- > 0;) {
    const Vector s = history[k].s.cwiseProduct(mask);
    const Vector y = history[k].y.cwiseProduct(mask);
    const double sy = s.dot(y);
    if (sy <= 1e-16 * s.norm() * y.norm() || sy <= 0.0) {
      continue;
    }
    rho[k] = 1.0 / sy;
    if (!have_scale) {
      gamma = sy / y.squaredNorm();
      have_scale = true;
    }
    alpha[k] = rho[k] * s.dot(q);
    q -= alpha[k] * y;
  }
  Vector r = gamma * q;
  for (size_t k = 0; k < m; ++k) {
    if (rho[k] == 0.0) {
      continue;
    }
    const Vector s = history[k].s.cwiseProduct(mask);
    const Vector y = history[k].y.cwiseProduct(mask);
    const double b = rho[k] * y.dot(r);
    r += (alpha[k] - b) * s;
  }
  return -r.cwiseProduct(mask);
}

}  // namespace

BoxMinResult minimize_box(const ValueAndGradient& fg, const Vector& x0, const Vector& lower,
                          const Vector& upper, const BoxMinOptions& options) {
  if (x0.size() != lower.size() || x0.size() != upper.size()) {
    throw DimensionMismatch("minimize_box: bound lengths differ from x0");
  }
  BoxMinResult res;
  Vector x = clamp(x0, lower, upper);
  Vector g(x.size());
  double f = fg(x, g);
  ++res.evaluations;
  res.f_start = f;
  if (!std::isfinite(f) || !g.allFinite()) {
    res.x = x;
    res.f = f;
    return res;
  }

  std::deque<Pair> history;
  Vector gn(x.size());
  for (int it = 0; it < options.max_iter; ++it) {
    const Vector pg = x - clamp(x - g, lower, upper);
    if (pg.lpNorm<Eigen::Infinity>() <= options.pgtol) {
      break;
    }
    const Vector mask = free_mask(x, g, lower, upper);
    Vector d = two_loop(history, g, mask);
    if (history.empty() || g.dot(d) >= 0.0) {
      d = -g.cwiseProduct(mask);
      const double dmax = d.lpNorm<Eigen::Infinity>();
      if (dmax > 1.0) {
        d /= dmax;
      }
      history.clear();
    }

    bool accepted = false;
    double t = 1.0;
    double fn = f;
    Vector xn;
    for (int ls = 0; ls < options.max_linesearch; ++ls) {
      xn = clamp(x + t * d, lower, upper);
      const Vector dx = xn - x;
      if (dx.lpNorm<Eigen::Infinity>() == 0.0) {
        break;
      }
      fn = fg(xn, gn);
      ++res.evaluations;
      const double slope = std::min(g.dot(dx), 0.0);
      if (std::isfinite(fn) && gn.allFinite() && fn < f && fn <= f + 1e-4 * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      if (!history.empty()) {
        history.clear();  // retry once with steepest descent
        continue;
      }
      break;
    }

    ++res.iterations;
    const Vector s = xn - x;
    const Vector y = gn - g;
    if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
      history.push_back({s, y});
      if (static_cast<int>(history.size()) > options.memory) {
        history.pop_front();
      }
    }
    const double decrease = f - fn;
    x = xn;
    g = gn;
    f = fn;
    if (decrease <= options.ftol * std::max(1.0, std::abs(f))) {
      break;
    }
  }
  res.x = x;
  res.f = f;
  return res;
}

}  // namespace gmmfad::opt
