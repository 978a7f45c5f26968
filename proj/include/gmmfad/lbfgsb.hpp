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

#include <functional>

#include "gmmfad/model.hpp"

namespace gmmfad::opt {

/// Returns f(x) and writes the gradient into `grad`.
using ValueAndGradient = std::function<double(const Vector& x, Vector& grad)>;

struct BoxMinOptions {
  int memory = 10;
  int max_iter = 50;
  double pgtol = 1e-7;   // infinity norm of the projected gradient
  double ftol = 1e-13;   // relative decrease below which iteration stops
  int max_linesearch = 30;
};

struct BoxMinResult {
  Vector x;
  double f = 0.0;
  double f_start = 0.0;
  int iterations = 0;
  int evaluations = 0;
};

/// Limited-memory BFGS for min f(x) subject to lower <= x <= upper.
///
/// Variables sitting on a bound with the gradient pushing outward are held
/// fixed; the two-loop recursion runs on the free set and steps are
/// projected back onto the box with an Armijo backtracking search. Every
/// accepted step strictly decreases f, so the returned point is never worse
/// than the (clamped) start.
BoxMinResult minimize_box(const ValueAndGradient& fg, const Vector& x0, const Vector& lower,
                          const Vector& upper, const BoxMinOptions& options = {});

}  // namespace gmmfad::opt
