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

#include <filesystem>
#include <fstream>

#include "gmmfad/preprocess.hpp"
#include "helpers.hpp"

using namespace gmmfad;
using namespace gmmfad::preprocess;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& text) {
  const fs::path dir = fs::temp_directory_path() / "gmmfad_preprocess_test";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  std::ofstream(p) << text;
  return p;
}

CsvErrorKind error_kind(const fs::path& p, const CsvOptions& o = {}) {
  try {
    load_csv(p, o);
  } catch (const CsvError& e) {
    return e.kind();
  }
  FAIL("expected a CSV error");
  return CsvErrorKind::kIo;
}

}  // namespace

TEST_CASE("numeric csv") {
  const auto p = write_temp("plain.csv", "a,b\n1,2\n3.5,-4e-1\n5,6\n");
  const auto d = load_csv(p);
  CHECK(d.data.n() == 3);
  CHECK(d.data.p() == 2);
  CHECK(d.data.values()(1, 1) == -0.4);
  CHECK(d.feature_names == std::vector<std::string>{"a", "b"});
  CHECK(!d.data.labels());

  const auto q = write_temp("noheader.csv", "1,2\n3,4\n");
  CsvOptions o;
  o.has_header = false;
  CHECK(load_csv(q, o).data.n() == 2);
}

TEST_CASE("categorical label column") {
  const auto p = write_temp("labels.csv", "dx,x\nM,1\nB,2\nM,3\n");
  CsvOptions o;
  o.label_column = "dx";
  const auto d = load_csv(p, o);
  CHECK(*d.data.labels() == Labels{0, 1, 0});
  CHECK(d.label_names == std::vector<std::string>{"M", "B"});
  CHECK(d.data.p() == 1);
  o.label_column = "missing";
  CHECK(error_kind(p, o) == CsvErrorKind::kMissingColumn);
}

TEST_CASE("csv diagnostics") {
  const auto ragged = write_temp("ragged.csv", "a,b\n1,2\n3\n");
  try {
    load_csv(ragged);
    FAIL("expected RaggedRow");
  } catch (const CsvError& e) {
    CHECK(e.kind() == CsvErrorKind::kRaggedRow);
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }
  CHECK(error_kind(write_temp("text.csv", "a,b\n1,x\n")) == CsvErrorKind::kNonNumeric);
  CHECK(error_kind(write_temp("empty.csv", "")) == CsvErrorKind::kEmptyFile);
  CHECK(error_kind(write_temp("header_only.csv", "a,b\n")) == CsvErrorKind::kEmptyFile);
  CHECK(error_kind(fs::path("/nonexistent/gmmfad.csv")) == CsvErrorKind::kIo);
}

TEST_CASE("label files") {
  const auto ints = load_labels(write_temp("l1.csv", "label\n0\n2\n1\n"));
  CHECK(ints.labels == Labels{0, 2, 1});
  const auto cats = load_labels(write_temp("l2.csv", "B\nM\nB\n"));
  CHECK(cats.labels == Labels{0, 1, 0});
  CHECK(cats.names == std::vector<std::string>{"B", "M"});
  CHECK(encode_labels({"x", "y", "x", "z"}).labels == Labels{0, 1, 0, 2});
}

TEST_CASE("inverse normal cdf") {
  CHECK(inverse_normal_cdf(0.5) == 0.0);
  // Reference values of the standard normal quantile.
  CHECK(inverse_normal_cdf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
  CHECK(inverse_normal_cdf(1.0 / 6.0) == doctest::Approx(-0.967421566101701).epsilon(1e-13));
  CHECK(inverse_normal_cdf(1e-10) == doctest::Approx(-6.361340902404056).epsilon(1e-13));
  CHECK(inverse_normal_cdf(1e-300) == doctest::Approx(-37.0470962993612).epsilon(1e-12));
  for (double p : {1e-6, 0.01, 0.2, 0.4, 0.6, 0.93}) {
    CHECK(inverse_normal_cdf(1.0 - p) == doctest::Approx(-inverse_normal_cdf(p)).epsilon(1e-9));
    // Round trip through the complementary error function.
    const double z = inverse_normal_cdf(p);
    CHECK(0.5 * std::erfc(-z / std::sqrt(2.0)) == doctest::Approx(p).epsilon(1e-13));
  }
}

TEST_CASE("gdt of a small column") {
  Matrix y(3, 1);
  y << 1, 2, 3;
  const auto g = gaussian_distributional_transform(DataMatrix(y));
  CHECK(g.data.values()(0, 0) == doctest::Approx(inverse_normal_cdf(1.0 / 6.0)));
  CHECK(g.data.values()(1, 0) == 0.0);
  CHECK(g.data.values()(2, 0) == doctest::Approx(inverse_normal_cdf(5.0 / 6.0)));
}

TEST_CASE("gdt ties, constants and labels") {
  Matrix y(4, 2);
  y << 1, 7, 2, 7, 2, 7, 3, 7;
  const auto g = gaussian_distributional_transform(DataMatrix(y, Labels{0, 1, 0, 1}));
  CHECK(g.data.values()(1, 0) == g.data.values()(2, 0));
  CHECK(g.data.values()(1, 0) == 0.0);
  CHECK(g.tie_counts == std::vector<int>{2, 4});
  CHECK(g.constant_features == std::vector<int>{1});
  CHECK(g.data.values().col(1).isZero(0.0));
  CHECK(*g.data.labels() == Labels{0, 1, 0, 1});
}

TEST_CASE("gdt properties") {
  Philox rng(61);
  for (int t = 0; t < 20; ++t) {
    const Index n = 100 + static_cast<Index>(rng.below(400));
    Matrix y = testing::gaussian_matrix(rng, n, 3);
    y.col(1) = y.col(1).array().exp();  // skewed
    for (Index i = 0; i < n; ++i) {
      y(i, 2) = static_cast<double>(rng.below(5));  // heavy ties
    }
    const auto g = gaussian_distributional_transform(DataMatrix(y));
    const Matrix& z = g.data.values();
    CHECK(z.allFinite());
    for (Index j = 0; j < 2; ++j) {
      const double mean = z.col(j).mean();
      const double var = (z.col(j).array() - mean).square().mean();
      CHECK(std::abs(mean) < 0.1 / std::sqrt(static_cast<double>(n)));
      CHECK(std::abs(var - 1.0) < 0.1);
    }

    // Strictly monotone maps leave the output unchanged.
    Matrix m = y;
    m.col(0) = (3.0 * y.col(0).array() + 1.0).cube();
    m.col(1) = y.col(1).array().log();
    m.col(2) = 2.0 * y.col(2).array() - 7.0;
    const auto gm = gaussian_distributional_transform(DataMatrix(m));
    for (Index j = 0; j < 3; ++j) {
      CHECK_MESSAGE(gm.data.values().col(j) == z.col(j), j);
    }

    // Increasing input gives increasing output.
    Vector sorted = y.col(0);
    std::sort(sorted.data(), sorted.data() + n);
    Matrix s(n, 1);
    s.col(0) = sorted;
    const auto gs = gaussian_distributional_transform(DataMatrix(s));
    for (Index i = 1; i < n; ++i) {
      CHECK(gs.data.values()(i, 0) > gs.data.values()(i - 1, 0));
    }
  }
}
