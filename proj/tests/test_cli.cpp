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
#include <iostream>
#include <sstream>

#include "gmmfad/cli.hpp"
#include "gmmfad/io.hpp"

using namespace gmmfad;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "gmmfad_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs the CLI with stdout captured.
int run_quiet(const std::vector<std::string>& args, std::string* out = nullptr) {
  std::stringstream buf;
  auto* old = std::cout.rdbuf(buf.rdbuf());
  const int code = cli::run(args);
  std::cout.rdbuf(old);
  if (out != nullptr) {
    *out = buf.str();
  }
  return code;
}

fs::path simulate(const fs::path& dir, const std::string& p, const std::string& n = "200") {
  REQUIRE(run_quiet({"simulate", "--n", n, "--p", p, "--k", "2", "--q", "1", "--seed", "5",
                     "--out-dir", dir.string()}) == cli::kExitOk);
  return dir / "rep_000";
}

}  // namespace

TEST_CASE("argument helpers") {
  CHECK(cli::parse_int_list("1,2,3") == std::vector<int>{1, 2, 3});
  CHECK(cli::parse_range("2..4") == std::vector<int>{2, 3, 4});
  CHECK(cli::parse_range("3") == std::vector<int>{3});
  CHECK_THROWS(cli::parse_range("4..2"));
  CHECK_THROWS(cli::parse_int_list("1,x"));
  CHECK(cli::quantile({1, 2, 3, 4}, 0.5) == 2.5);
  CHECK(cli::quantile({5}, 0.25) == 5.0);
}

TEST_CASE("simulate then fit") {
  const auto dir = scratch("pipeline");
  const auto rep = simulate(dir / "sim", "6");
  CHECK(fs::exists(rep / "data.csv"));
  CHECK(fs::exists(rep / "labels.csv"));
  CHECK(fs::exists(rep / "truth.json"));

  const std::vector<std::string> fit_args{
      "fit", "--data", (rep / "data.csv").string(), "--labels", (rep / "labels.csv").string(),
      "--k", "2", "--q", "1", "--starts", "3", "--seed", "1", "--out-dir",
      (dir / "fit").string()};
  REQUIRE(run_quiet(fit_args) == cli::kExitOk);
  for (const char* f : {"fit.json", "timing.json", "assignments.csv", "loadings_0.csv",
                        "loadings_1.csv", "metrics.json"}) {
    CHECK(fs::exists(dir / "fit" / f));
  }
  const auto report = io::read_json(dir / "fit" / "fit.json");
  CHECK(report["schema"] == io::kFitSchema);
  CHECK(report["n"] == 200);
  const auto model = io::model_from_json(report["model"]);
  CHECK(model.components.size() == 2);
  const auto metrics = io::read_json(dir / "fit" / "metrics.json");
  CHECK(metrics["ari"].get<double>() > 0.8);

  // A second run produces identical bytes.
  const std::string first = slurp(dir / "fit" / "fit.json");
  REQUIRE(run_quiet(fit_args) == cli::kExitOk);
  CHECK(slurp(dir / "fit" / "fit.json") == first);
  CHECK(slurp(dir / "fit" / "assignments.csv").rfind("cluster\n", 0) == 0);

  // Evaluating the written assignments.
  std::string out;
  CHECK(run_quiet({"eval", "--pred", (dir / "fit" / "assignments.csv").string(), "--truth",
                   (rep / "labels.csv").string(), "--out-dir", (dir / "eval").string()},
                  &out) == cli::kExitOk);
  CHECK(out.find("ari") != std::string::npos);
  CHECK(fs::exists(dir / "eval" / "metrics.json"));

  CHECK(run_quiet({"report", "--fit", (dir / "fit" / "fit.json").string(), "--suppress-below",
                   "0.3", "--out-dir", (dir / "report").string()}) == cli::kExitOk);
  CHECK(slurp(dir / "report" / "report.txt").find("component") != std::string::npos);
}

TEST_CASE("select writes a bic table") {
  const auto dir = scratch("select");
  const auto rep = simulate(dir / "sim", "6");
  REQUIRE(run_quiet({"select", "--data", (rep / "data.csv").string(), "--k-range", "1..2",
                     "--q-min", "1", "--q-max", "2", "--starts", "2", "--out-dir",
                     (dir / "sel").string()}) == cli::kExitOk);
  const std::string table = slurp(dir / "sel" / "bic_table.csv");
  CHECK(table.rfind("K,q_spec,", 0) == 0);
  CHECK(std::count(table.begin(), table.end(), '\n') == 5);
  CHECK(fs::exists(dir / "sel" / "fit.json"));
}

TEST_CASE("the baseline refuses high dimensions unless forced") {
  const auto dir = scratch("aecm");
  const auto rep = simulate(dir / "sim", "501", "60");
  const std::vector<std::string> base{"fit", "--data", (rep / "data.csv").string(), "--k", "2",
                                      "--q", "1", "--engine", "aecm", "--starts", "1",
                                      "--max-iter", "2", "--out-dir", (dir / "fit").string()};
  CHECK(run_quiet(base) == cli::kExitValidation);
  auto forced = base;
  forced.push_back("--force");
  CHECK(run_quiet(forced) == cli::kExitOk);
}

TEST_CASE("usage errors") {
  CHECK(run_quiet({"fit", "--k", "2"}) == cli::kExitValidation);
  CHECK(run_quiet({"nonsense"}) == cli::kExitValidation);
  CHECK(run_quiet({"fit", "--data", "/nonexistent.csv", "--k", "2", "--q", "1"}) ==
        cli::kExitValidation);
  const auto dir = scratch("bad");
  const auto rep = simulate(dir / "sim", "6");
  CHECK(run_quiet({"fit", "--data", (rep / "data.csv").string(), "--k", "2", "--q", "9",
                   "--out-dir", (dir / "fit").string()}) == cli::kExitValidation);
}

TEST_CASE("help lists every flag") {
  std::string out;
  CHECK(run_quiet({"fit", "--help"}, &out) == cli::kExitOk);
  for (const char* flag : {"--data", "--labels", "--label-col", "--no-header", "--gdt", "--k",
                           "--q", "--tol", "--max-iter", "--starts", "--finalists", "--engine",
                           "--force", "--seed", "--threads", "--out-dir"}) {
    CHECK_MESSAGE(out.find(flag) != std::string::npos, flag);
  }
  CHECK(run_quiet({"select", "--help"}, &out) == cli::kExitOk);
  for (const char* flag : {"--k-range", "--q-min", "--q-max", "--per-cluster-q"}) {
    CHECK_MESSAGE(out.find(flag) != std::string::npos, flag);
  }
  CHECK(run_quiet({"bench", "--help"}, &out) == cli::kExitOk);
  CHECK(out.find("--reps") != std::string::npos);
}
