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

#include <stdexcept>
#include <string>

namespace gmmfad {

/// Bad input: wrong shapes, invalid parameters, malformed files.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Requested rank is not below the operator dimension.
class InvalidRank : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// The AECM baseline refuses dimensions above its practical limit.
class DimensionTooLarge : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Iterative solver or fitting procedure failed to produce a result.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoConvergence : public ConvergenceError {
 public:
  using ConvergenceError::ConvergenceError;
};

/// A component's effective sample count dropped below the floor.
class EmptyCluster : public ConvergenceError {
 public:
  EmptyCluster(int component, double weight_sum)
      : ConvergenceError("component " + std::to_string(component) +
                         " emptied (effective size " +
                         std::to_string(weight_sum) + ")"),
        component_(component) {}
  int component() const { return component_; }

 private:
  int component_;
};

class AllStartsFailed : public ConvergenceError {
 public:
  using ConvergenceError::ConvergenceError;
};

class NonFiniteDensity : public ConvergenceError {
 public:
  using ConvergenceError::ConvergenceError;
};

}  // namespace gmmfad
