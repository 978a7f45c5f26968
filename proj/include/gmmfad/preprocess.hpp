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
#include <optional>
#include <string>
#include <vector>

#include "gmmfad/model.hpp"

namespace gmmfad::preprocess {

enum class CsvErrorKind { kEmptyFile, kRaggedRow, kNonNumeric, kMissingColumn, kIo };

class CsvError : public ValidationError {
 public:
  CsvError(CsvErrorKind kind, const std::string& what, long line = -1)
      : ValidationError(what), kind_(kind), line_(line) {}
  CsvErrorKind kind() const { return kind_; }
  long line() const { return line_; }  // 1-based file line, -1 if none

 private:
  CsvErrorKind kind_;
  long line_;
};

struct CsvOptions {
  bool has_header = true;
  /// Column holding labels: a header name, or a 0-based index when the file
  /// has no header.
  std::optional<std::string> label_column;
};

struct LoadedData {
  DataMatrix data;
  std::vector<std::string> feature_names;
  std::vector<std::string> label_names;  // label_names[id] = original value
};

/// Rectangular numeric CSV. Label cells may be arbitrary strings; they are
/// mapped to 0..L-1 in order of first appearance.
LoadedData load_csv(const std::filesystem::path& path, const CsvOptions& options = {});

struct LabelColumn {
  Labels labels;
  std::vector<std::string> names;
};

/// Single-column label file (e.g. a simulate sidecar or a predictions file).
/// A non-numeric first row is taken as a header.
LabelColumn load_labels(const std::filesystem::path& path);

/// Maps string labels to ids in order of first appearance.
LabelColumn encode_labels(const std::vector<std::string>& raw);

struct GdtResult {
  DataMatrix data;
  std::vector<int> tie_counts;          // per feature: observations sharing a value
  std::vector<int> constant_features;   // transformed to all zeros
};

/// Normal-scores transform per feature: average ranks r_i for ties,
/// u_i = (r_i - 0.5) / n, output Phi^{-1}(u_i). Labels are carried over.
GdtResult gaussian_distributional_transform(const DataMatrix& data);

/// Inverse standard normal CDF, Wichura's AS 241 (PPND16), relative
/// accuracy about 1e-16 on (0, 1).
double inverse_normal_cdf(double p);

}  // namespace gmmfad::preprocess
