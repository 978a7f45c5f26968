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

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gmmfad/ecm.hpp"
#include "gmmfad/model.hpp"

namespace gmmfad::io {

inline constexpr const char* kFitSchema = "gmmfad.fit/1";
inline constexpr const char* kModelSchema = "gmmfad.model/1";

/// Writes to a sibling temporary file and renames it over `path`, so the
/// target is either complete or untouched.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Shortest round-trip decimal form of a double.
std::string format_double(double x);

std::string matrix_csv(const Matrix& m, const std::vector<std::string>& header);
std::string labels_csv(std::span<const int> labels, const std::string& header = "label");

nlohmann::json model_to_json(const MixtureModel& model);
MixtureModel model_from_json(const nlohmann::json& j);

/// Everything in a fit except wall-clock time, so repeated runs serialise
/// byte-identically.
nlohmann::json report_to_json(const FitReport& report, const FitConfig& config);

nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace gmmfad::io
