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

namespace gmmfad::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitConvergence = 3;

/// Entry point behind the gmmfad executable. Subcommands: simulate, fit,
/// select, eval, bench, report. Diagnostics go to stderr.
int run(int argc, const char* const* argv);

/// Convenience overload for tests: args exclude the program name.
int run(const std::vector<std::string>& args);

/// "3" -> {3}; "3,1" -> {3, 1}. Throws ValidationError on junk.
std::vector<int> parse_int_list(const std::string& text);

/// "2..4" -> {2, 3, 4}; a single integer is a one-element range.
std::vector<int> parse_range(const std::string& text);

/// Linear-interpolation quantile of unsorted values (0 <= prob <= 1).
double quantile(std::vector<double> values, double prob);

}  // namespace gmmfad::cli
