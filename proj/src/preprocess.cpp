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

#include "gmmfad/preprocess.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

namespace gmmfad::preprocess {

namespace {

std::string trim(std::string_view s) {
  size_t b = 0;
  size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) {
    ++b;
  }
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) {
    --e;
  }
  std::string out(s.substr(b, e - b));
  if (out.size() >= 2 && ((out.front() == '"' && out.back() == '"') ||
                          (out.front() == '\'' && out.back() == '\''))) {
    out = out.substr(1, out.size() - 2);
  }
  return out;
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(trim(std::string_view(line).substr(start)));
      break;
    }
    cells.push_back(trim(std::string_view(line).substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

bool parse_double(const std::string& cell, double& out) {
  if (cell.empty()) {
    return false;
  }
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (*first == '+') {
    ++first;
  }
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

struct RawRow {
  long line;
  std::vector<std::string> cells;
};

std::vector<RawRow> read_rows(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw CsvError(CsvErrorKind::kIo, "cannot open " + path.string());
  }
  std::vector<RawRow> rows;
  std::string line;
  long number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (trim(line).empty()) {
      continue;
    }
    rows.push_back({number, split_row(line)});
  }
  if (rows.empty()) {
    throw CsvError(CsvErrorKind::kEmptyFile, path.string() + ": file is empty");
  }
  return rows;
}

}  // namespace

LabelColumn encode_labels(const std::vector<std::string>& raw) {
  LabelColumn out;
  std::map<std::string, int> ids;
  for (const auto& value : raw) {
    auto [it, inserted] = ids.emplace(value, static_cast<int>(out.names.size()));
    if (inserted) {
      out.names.push_back(value);
    }
    out.labels.push_back(it->second);
  }
  return out;
}

LoadedData load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  const auto rows = read_rows(path);
  size_t first_data = 0;
  std::vector<std::string> header;
  if (options.has_header) {
    header = rows.front().cells;
    first_data = 1;
  }
  const size_t width = rows.front().cells.size();
  if (rows.size() <= first_data) {
    throw CsvError(CsvErrorKind::kEmptyFile, path.string() + ": no data rows");
  }

  std::optional<size_t> label_idx;
  if (options.label_column) {
    const std::string& want = *options.label_column;
    if (options.has_header) {
      const auto it = std::find(header.begin(), header.end(), want);
      if (it == header.end()) {
        throw CsvError(CsvErrorKind::kMissingColumn,
                       path.string() + ": no column named '" + want + "'");
      }
      label_idx = static_cast<size_t>(it - header.begin());
    } else {
      size_t idx = 0;
      auto [ptr, ec] = std::from_chars(want.data(), want.data() + want.size(), idx);
      if (ec != std::errc() || ptr != want.data() + want.size() || idx >= width) {
        throw CsvError(CsvErrorKind::kMissingColumn,
                       path.string() + ": label column '" + want + "' is not a valid index");
      }
      label_idx = idx;
    }
  }

  const size_t n = rows.size() - first_data;
  const size_t p = width - (label_idx ? 1 : 0);
  if (p == 0) {
    throw CsvError(CsvErrorKind::kEmptyFile, path.string() + ": no feature columns");
  }
  Matrix values(static_cast<Index>(n), static_cast<Index>(p));
  std::vector<std::string> raw_labels;
  for (size_t r = first_data; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.cells.size() != width) {
      throw CsvError(CsvErrorKind::kRaggedRow,
                     path.string() + ":" + std::to_string(row.line) + ": expected " +
                         std::to_string(width) + " cells, found " +
                         std::to_string(row.cells.size()),
                     row.line);
    }
    Index col = 0;
    for (size_t c = 0; c < width; ++c) {
      if (label_idx && c == *label_idx) {
        raw_labels.push_back(row.cells[c]);
        continue;
      }
      double v = 0.0;
      if (!parse_double(row.cells[c], v)) {
        throw CsvError(CsvErrorKind::kNonNumeric,
                       path.string() + ":" + std::to_string(row.line) + ": cell " +
                           std::to_string(c + 1) + " ('" + row.cells[c] + "') is not numeric",
                       row.line);
      }
      values(static_cast<Index>(r - first_data), col++) = v;
    }
  }

  std::vector<std::string> features;
  for (size_t c = 0; c < width; ++c) {
    if (label_idx && c == *label_idx) {
      continue;
    }
    features.push_back(options.has_header ? header[c] : "x" + std::to_string(features.size() + 1));
  }
  std::optional<Labels> labels;
  std::vector<std::string> names;
  if (label_idx) {
    auto enc = encode_labels(raw_labels);
    labels = std::move(enc.labels);
    names = std::move(enc.names);
  }
  return LoadedData{DataMatrix(std::move(values), std::move(labels)), std::move(features),
                    std::move(names)};
}

LabelColumn load_labels(const std::filesystem::path& path) {
  auto rows = read_rows(path);
  for (const auto& row : rows) {
    if (row.cells.size() != 1) {
      throw CsvError(CsvErrorKind::kRaggedRow,
                     path.string() + ":" + std::to_string(row.line) +
                         ": label files must have exactly one column",
                     row.line);
    }
  }
  size_t first = 0;
  double dummy = 0.0;
  if (!parse_double(rows.front().cells.front(), dummy)) {
    // Header unless every row is non-numeric (categorical labels).
    bool any_numeric = false;
    for (size_t r = 1; r < rows.size(); ++r) {
      any_numeric = any_numeric || parse_double(rows[r].cells.front(), dummy);
    }
    if (any_numeric || rows.front().cells.front() == "label") {
      first = 1;
    }
  }
  std::vector<std::string> raw;
  for (size_t r = first; r < rows.size(); ++r) {
    raw.push_back(rows[r].cells.front());
  }
  if (raw.empty()) {
    throw CsvError(CsvErrorKind::kEmptyFile, path.string() + ": no labels");
  }
  // Integer labels keep their values so predictions and truth line up.
  bool all_int = true;
  Labels ints;
  for (const auto& s : raw) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || v < 0) {
      all_int = false;
      break;
    }
    ints.push_back(v);
  }
  if (all_int) {
    LabelColumn out;
    out.labels = std::move(ints);
    const int mx = *std::max_element(out.labels.begin(), out.labels.end());
    for (int i = 0; i <= mx; ++i) {
      out.names.push_back(std::to_string(i));
    }
    return out;
  }
  return encode_labels(raw);
}

GdtResult gaussian_distributional_transform(const DataMatrix& data) {
  const Index n = data.n();
  const Index p = data.p();
  Matrix out(n, p);
  GdtResult res{DataMatrix(Matrix::Zero(n, p), data.labels()), {}, {}};
  std::vector<Index> order(static_cast<size_t>(n));
  for (Index j = 0; j < p; ++j) {
    const auto col = data.values().col(j);
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&col](Index a, Index b) { return col[a] < col[b]; });
    int ties = 0;
    int groups = 0;
    size_t start = 0;
    while (start < order.size()) {
      size_t end = start + 1;
      while (end < order.size() && col[order[end]] == col[order[start]]) {
        ++end;
      }
      // 1-based ranks start+1 .. end share their average.
      const double rank = 0.5 * (static_cast<double>(start + 1) + static_cast<double>(end));
      const double u = (rank - 0.5) / static_cast<double>(n);
      const double z = inverse_normal_cdf(u);
      for (size_t t = start; t < end; ++t) {
        out(order[t], j) = z;
      }
      if (end - start > 1) {
        ties += static_cast<int>(end - start);
      }
      start = end;
      ++groups;
    }
    res.tie_counts.push_back(ties);
    if (groups == 1) {
      res.constant_features.push_back(static_cast<int>(j));
      out.col(j).setZero();
    }
  }
  res.data = DataMatrix(std::move(out), data.labels());
  return res;
}

double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) {
      return -INFINITY;
    }
    if (p == 1.0) {
      return INFINITY;
    }
    throw ValidationError("inverse_normal_cdf: probability outside [0, 1]");
  }
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        (((((((2509.0809287301226727 * r + 33430.575583588128105) * r + 67265.770927008700853) * r +
             45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r +
          133.14166789178437745) * r + 3.387132872796366608);
    const double den =
        (((((((5226.495278852545925 * r + 28729.085735721942674) * r + 39307.89580009271061) * r +
             21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r +
          42.313330701600911252) * r + 1.0);
    return q * num / den;
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val = 0.0;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r +
              0.24178072517745061177) * r + 1.27045825245236838258) * r +
            3.64784832476320460504) * r + 5.7694972214606914055) * r + 4.6303378461565452959) * r +
         1.42343711074968357734);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r +
              0.0151986665636164571966) * r + 0.14810397642748007459) * r +
            0.68976733498510000455) * r + 1.6763848301838038494) * r + 2.05319162663775882187) * r +
         1.0);
    val = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              0.0012426609473880784386) * r + 0.026532189526576123093) * r +
            0.29656057182850489123) * r + 1.7848265399172913358) * r + 5.4637849111641143699) * r +
         6.6579046435011037772);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r +
              1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
            0.0148753612908506148525) * r + 0.13692988092273580531) * r +
          0.59983220655588793769) * r + 1.0);
    val = num / den;
  }
  return q < 0.0 ? -val : val;
}

}  // namespace gmmfad::preprocess
