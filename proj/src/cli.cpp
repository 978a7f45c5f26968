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

#include "gmmfad/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gmmfad/aecm.hpp"
#include "gmmfad/ecm.hpp"
#include "gmmfad/eval.hpp"
#include "gmmfad/io.hpp"
#include "gmmfad/preprocess.hpp"
#include "gmmfad/selection.hpp"
#include "gmmfad/simgen.hpp"

namespace gmmfad::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find(',', start);
    if (end == std::string::npos) {
      end = text.size();
    }
    const std::string cell = text.substr(start, end - start);
    int v = 0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
      throw ValidationError("expected an integer or comma-separated integers, got '" + text + "'");
    }
    out.push_back(v);
    start = end + 1;
  }
  return out;
}

std::vector<int> parse_range(const std::string& text) {
  const size_t dots = text.find("..");
  if (dots == std::string::npos) {
    return parse_int_list(text);
  }
  const auto lo = parse_int_list(text.substr(0, dots));
  const auto hi = parse_int_list(text.substr(dots + 2));
  if (lo.size() != 1 || hi.size() != 1 || lo[0] > hi[0]) {
    throw ValidationError("expected a range a..b with a <= b, got '" + text + "'");
  }
  std::vector<int> out;
  for (int v = lo[0]; v <= hi[0]; ++v) {
    out.push_back(v);
  }
  return out;
}

double quantile(std::vector<double> values, double prob) {
  if (values.empty()) {
    return std::nan("");
  }
  std::sort(values.begin(), values.end());
  const double pos = prob * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

struct Common {
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out_dir = "out";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Seed for every random draw")->capture_default_str();
  cmd->add_option("--threads", c.threads, "Worker threads (0 = all logical cores)")
      ->capture_default_str();
  cmd->add_option("--out-dir", c.out_dir, "Directory for output files")->capture_default_str();
}

struct FitFlags {
  std::string data;
  std::string labels;
  std::string label_col;
  bool no_header = false;
  bool gdt = false;
  double tol = 1e-6;
  int max_iter = 500;
  int starts = 20;
  int finalists = 3;
  std::string positive_class;
};

void add_data_flags(CLI::App* cmd, FitFlags& f) {
  cmd->add_option("--data", f.data, "Feature CSV")->required();
  cmd->add_option("--labels", f.labels, "Single-column CSV of true labels");
  cmd->add_option("--label-col", f.label_col, "Column of --data holding true labels");
  cmd->add_flag("--no-header", f.no_header, "Data CSV has no header row");
  cmd->add_flag("--gdt", f.gdt, "Apply the Gaussian distributional transform first");
  cmd->add_option("--positive-class", f.positive_class,
                  "Label treated as positive in binary metrics (default: first seen)");
}

void add_engine_flags(CLI::App* cmd, FitFlags& f) {
  cmd->add_option("--tol", f.tol, "Absolute log-likelihood tolerance")->capture_default_str();
  cmd->add_option("--max-iter", f.max_iter, "Iteration cap per run")->capture_default_str();
  cmd->add_option("--starts", f.starts, "Random starts (plus one k-means start)")
      ->capture_default_str();
  cmd->add_option("--finalists", f.finalists, "Starts run to convergence")->capture_default_str();
}

struct Loaded {
  DataMatrix data;
  std::vector<std::string> features;
  std::vector<std::string> label_names;
  json gdt;
};

Loaded load_input(const FitFlags& f) {
  if (!f.labels.empty() && !f.label_col.empty()) {
    throw ValidationError("use either --labels or --label-col, not both");
  }
  preprocess::CsvOptions opts;
  opts.has_header = !f.no_header;
  if (!f.label_col.empty()) {
    opts.label_column = f.label_col;
  }
  auto loaded = preprocess::load_csv(f.data, opts);
  Loaded out{std::move(loaded.data), std::move(loaded.feature_names),
             std::move(loaded.label_names), json()};
  if (!f.labels.empty()) {
    auto col = preprocess::load_labels(f.labels);
    if (static_cast<Index>(col.labels.size()) != out.data.n()) {
      throw DimensionMismatch("label file has " + std::to_string(col.labels.size()) +
                              " rows, data has " + std::to_string(out.data.n()));
    }
    out.data = DataMatrix(out.data.values(), std::move(col.labels));
    out.label_names = std::move(col.names);
  }
  if (f.gdt) {
    auto g = preprocess::gaussian_distributional_transform(out.data);
    for (int j : g.constant_features) {
      std::cerr << "warning: feature '" << out.features[static_cast<size_t>(j)]
                << "' is constant; GDT maps it to zeros\n";
    }
    json ties = json::object();
    for (size_t j = 0; j < out.features.size(); ++j) {
      ties[out.features[j]] = g.tie_counts[j];
    }
    out.gdt = {{"transform", "normal-scores, average ranks, (r - 0.5) / n"},
               {"tie_counts", ties},
               {"constant_features", g.constant_features}};
    out.data = std::move(g.data);
  }
  return out;
}

int positive_id(const std::vector<std::string>& names, const std::string& wanted) {
  if (wanted.empty()) {
    return 0;
  }
  const auto it = std::find(names.begin(), names.end(), wanted);
  if (it == names.end()) {
    throw ValidationError("positive class '" + wanted + "' does not occur in the labels");
  }
  return static_cast<int>(it - names.begin());
}

json metrics_json(std::span<const int> pred, std::span<const int> truth,
                  const std::vector<std::string>& names, const std::string& positive) {
  json m;
  m["ari"] = eval::adjusted_rand_index(pred, truth);
  const std::set<int> pc(pred.begin(), pred.end());
  const std::set<int> tc(truth.begin(), truth.end());
  if (pc.size() <= 2 && tc.size() <= 2) {
    const int pos = positive_id(names, positive);
    const auto cm = eval::confusion_metrics(pred, truth, pos);
    m["positive_class"] = static_cast<size_t>(pos) < names.size()
                              ? names[static_cast<size_t>(pos)]
                              : std::to_string(pos);
    m["positive_cluster"] = cm.positive_cluster;
    m["accuracy"] = cm.accuracy;
    m["sensitivity"] = cm.sensitivity;
    m["specificity"] = cm.specificity;
    m["kappa"] = cm.kappa;
    m["confusion"] = {{"tp", cm.tp}, {"fn", cm.fn}, {"tn", cm.tn}, {"fp", cm.fp}};
  }
  return m;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void write_fit_artifacts(const fs::path& dir, const FitReport& report, const FitConfig& config,
                         const Loaded& in, const std::string& positive) {
  json fj = io::report_to_json(report, config);
  fj["features"] = in.features;
  if (!in.gdt.is_null()) {
    fj["preprocessing"] = "gdt";
  }
  io::write_atomic(dir / "fit.json", dump(fj));
  io::write_atomic(dir / "timing.json",
                   dump(json{{"engine", report.engine}, {"wall_time_seconds", report.wall_time}}));
  io::write_atomic(dir / "assignments.csv", io::labels_csv(report.hard_assignment, "cluster"));
  for (int k = 0; k < report.model.n_components(); ++k) {
    const auto& c = report.model.components[static_cast<size_t>(k)];
    std::vector<std::string> header;
    for (int l = 0; l < c.n_factors(); ++l) {
      header.push_back("factor" + std::to_string(l + 1));
    }
    io::write_atomic(dir / ("loadings_" + std::to_string(k) + ".csv"),
                     io::matrix_csv(c.loadings, header));
  }
  if (!in.gdt.is_null()) {
    io::write_atomic(dir / "gdt.json", dump(in.gdt));
  }
  if (in.data.labels()) {
    io::write_atomic(dir / "metrics.json",
                     dump(metrics_json(report.hard_assignment, *in.data.labels(), in.label_names,
                                       positive)));
  }
}

FitConfig engine_config(const FitFlags& f, const Common& c) {
  FitConfig config;
  config.tol = f.tol;
  config.max_iter = f.max_iter;
  config.n_random_starts = f.starts;
  config.n_finalists = f.finalists;
  config.seed = c.seed;
  config.threads = c.threads;
  return config;
}

// --- simulate ---------------------------------------------------------------

struct SimFlags {
  Common common;
  Index n = 300;
  Index p = 10;
  int k = 2;
  std::string q = "2";
  double separation = sim::kHighSeparation;
  int reps = 1;
};

int cmd_simulate(const SimFlags& f) {
  sim::SimSpec spec;
  spec.n = f.n;
  spec.p = f.p;
  spec.n_components = f.k;
  spec.factors = parse_int_list(f.q);
  spec.separation = f.separation;
  if (f.reps < 1) {
    throw ValidationError("--reps must be at least 1");
  }
  sim::validate(spec);
  const fs::path out(f.common.out_dir);
  std::vector<std::string> header;
  for (Index j = 0; j < f.p; ++j) {
    header.push_back("x" + std::to_string(j + 1));
  }
  for (int r = 0; r < f.reps; ++r) {
    spec.seed = f.common.seed + static_cast<std::uint64_t>(r);
    const auto truth = sim::draw_truth(spec);
    const auto data = sim::sample_dataset(truth, spec.n, spec.seed);
    std::ostringstream name;
    name << "rep_" << std::setw(3) << std::setfill('0') << r;
    const fs::path dir = out / name.str();
    io::write_atomic(dir / "data.csv", io::matrix_csv(data.values(), header));
    io::write_atomic(dir / "labels.csv", io::labels_csv(*data.labels()));
    json tj = io::model_to_json(truth);
    tj["simulation"] = {{"n", spec.n},
                        {"p", spec.p},
                        {"n_components", spec.n_components},
                        {"factors", spec.factors},
                        {"separation", spec.separation},
                        {"seed", spec.seed}};
    io::write_atomic(dir / "truth.json", dump(tj));
  }
  std::cout << "wrote " << f.reps << " dataset(s) to " << out.string() << "\n";
  return kExitOk;
}

// --- fit --------------------------------------------------------------------

struct FitCmd {
  Common common;
  FitFlags flags;
  int k = 2;
  std::string q = "1";
  std::string engine = "gmmfad";
  bool force = false;
};

int cmd_fit(const FitCmd& f) {
  const Loaded in = load_input(f.flags);
  FitConfig config = engine_config(f.flags, f.common);
  config.n_components = f.k;
  config.factors = parse_int_list(f.q);
  config.force = f.force;
  FitReport report;
  if (f.engine == "gmmfad") {
    report = fit(in.data, config);
  } else if (f.engine == "aecm") {
    report = aecm::fit_baseline_aecm(in.data, config);
  } else {
    throw ValidationError("unknown engine '" + f.engine + "'");
  }
  write_fit_artifacts(f.common.out_dir, report, config, in, f.flags.positive_class);
  std::cout << std::setprecision(10) << "engine " << report.engine << "  loglik " << report.loglik
            << "  bic " << report.bic << "  iterations " << report.n_iter << "\n";
  return kExitOk;
}

// --- select -----------------------------------------------------------------

struct SelectCmd {
  Common common;
  FitFlags flags;
  std::string k_range = "1..2";
  int q_min = 1;
  int q_max = 1;
  bool per_cluster = false;
};

int cmd_select(const SelectCmd& f) {
  const Loaded in = load_input(f.flags);
  select::SearchGrid grid;
  grid.k_values = parse_range(f.k_range);
  grid.q_min = f.q_min;
  grid.q_max = f.q_max;
  grid.q_mode = f.per_cluster ? select::QMode::kPerCluster : select::QMode::kCommon;
  grid.fit_config_template = engine_config(f.flags, f.common);
  const auto resolved = select::resolve_grid(grid, in.data.n(), in.data.p());
  if (resolved.q_max < grid.q_max) {
    std::cerr << "note: --q-max " << grid.q_max << " exceeds the largest admissible q; using "
              << resolved.q_max << "\n";
  }
  const auto result = f.per_cluster ? select::select_per_cluster_q(in.data, grid)
                                    : select::select_common_q(in.data, grid);
  const fs::path out(f.common.out_dir);
  io::write_atomic(out / "bic_table.csv", select::table_csv(result.table));
  const auto& row = result.table[result.best_row];
  FitConfig config = grid.fit_config_template;
  config.n_components = row.n_components;
  config.factors = row.factors;
  write_fit_artifacts(out, result.best, config, in, f.flags.positive_class);
  std::cout << std::setprecision(10) << "selected K=" << row.n_components
            << " q=" << select::q_spec(row.factors) << "  bic " << row.bic << "\n";
  return kExitOk;
}

// --- eval -------------------------------------------------------------------

struct EvalCmd {
  Common common;
  std::string pred;
  std::string truth;
  std::string positive_class;
};

int cmd_eval(const EvalCmd& f) {
  const auto pred = preprocess::load_labels(f.pred);
  const auto truth = preprocess::load_labels(f.truth);
  if (pred.labels.size() != truth.labels.size()) {
    throw DimensionMismatch("prediction and truth differ in length");
  }
  const json m = metrics_json(pred.labels, truth.labels, truth.names, f.positive_class);
  io::write_atomic(fs::path(f.common.out_dir) / "metrics.json", dump(m));
  std::cout << dump(m);
  return kExitOk;
}

// --- bench ------------------------------------------------------------------

struct BenchCmd {
  Common common;
  Index n = 150;
  Index p = 150;
  int k = 2;
  int q = 2;
  int reps = 10;
  double separation = sim::kHighSeparation;
  int starts = 20;
  int finalists = 3;
};

int cmd_bench(const BenchCmd& f) {
  if (f.reps < 1) {
    throw ValidationError("--reps must be at least 1");
  }
  sim::SimSpec spec;
  spec.n = f.n;
  spec.p = f.p;
  spec.n_components = f.k;
  spec.factors = {f.q};
  spec.separation = f.separation;
  std::ostringstream csv;
  csv << "rep,n,p,K,q,gmmfad_seconds,aecm_seconds,gmmfad_loglik,aecm_loglik,speedup\n";
  std::vector<double> speedups;
  for (int r = 0; r < f.reps; ++r) {
    spec.seed = f.common.seed + static_cast<std::uint64_t>(r);
    const auto data = sim::sample_dataset(sim::draw_truth(spec), spec.n, spec.seed);
    FitConfig config;
    config.n_components = f.k;
    config.factors = {f.q};
    config.seed = spec.seed;
    config.threads = f.common.threads;
    config.n_random_starts = f.starts;
    config.n_finalists = f.finalists;
    config.force = true;
    const auto g = fit(data, config);
    const auto a = aecm::fit_baseline_aecm(data, config);
    const double s = a.wall_time / g.wall_time;
    speedups.push_back(s);
    csv << r << ',' << f.n << ',' << f.p << ',' << f.k << ',' << f.q << ','
        << io::format_double(g.wall_time) << ',' << io::format_double(a.wall_time) << ','
        << io::format_double(g.loglik) << ',' << io::format_double(a.loglik) << ','
        << io::format_double(s) << '\n';
  }
  const json summary{{"reps", f.reps},
                     {"n", f.n},
                     {"p", f.p},
                     {"K", f.k},
                     {"q", f.q},
                     {"speedup_median", quantile(speedups, 0.5)},
                     {"speedup_q1", quantile(speedups, 0.25)},
                     {"speedup_q3", quantile(speedups, 0.75)}};
  const fs::path out(f.common.out_dir);
  io::write_atomic(out / "bench.csv", csv.str());
  io::write_atomic(out / "bench_summary.json", dump(summary));
  std::cout << dump(summary);
  return kExitOk;
}

// --- report -----------------------------------------------------------------

struct ReportCmd {
  Common common;
  std::string fit_path;
  double suppress_below = 0.0;
};

int cmd_report(const ReportCmd& f) {
  const json fj = io::read_json(f.fit_path);
  const auto model = io::model_from_json(fj.at("model"));
  std::vector<std::string> features;
  if (fj.contains("features")) {
    features = fj.at("features").get<std::vector<std::string>>();
  }
  std::ostringstream os;
  os << std::fixed << std::setprecision(3);
  for (int k = 0; k < model.n_components(); ++k) {
    const auto& c = model.components[static_cast<size_t>(k)];
    os << "component " << k << "  weight " << c.weight << "  factors " << c.n_factors() << "\n";
    os << "feature";
    for (int l = 0; l < c.n_factors(); ++l) {
      os << ",factor" << l + 1;
    }
    os << ",uniqueness\n";
    for (Index j = 0; j < c.dim(); ++j) {
      os << (static_cast<size_t>(j) < features.size() ? features[static_cast<size_t>(j)]
                                                      : "x" + std::to_string(j + 1));
      for (int l = 0; l < c.n_factors(); ++l) {
        const double v = c.loadings(j, l);
        os << ',';
        if (std::abs(v) >= f.suppress_below) {
          os << v;
        }
      }
      os << ',' << c.uniquenesses[j] << "\n";
    }
    os << "\n";
  }
  io::write_atomic(fs::path(f.common.out_dir) / "report.txt", os.str());
  std::cout << os.str();
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Mixtures of factor analyzers fitted by profile-likelihood ECM", "gmmfad"};
  app.require_subcommand(1);

  SimFlags sim_flags;
  auto* sim_cmd = app.add_subcommand("simulate", "Draw synthetic MFA datasets");
  add_common(sim_cmd, sim_flags.common);
  sim_cmd->add_option("--n", sim_flags.n, "Observations per dataset")->capture_default_str();
  sim_cmd->add_option("--p", sim_flags.p, "Features")->capture_default_str();
  sim_cmd->add_option("--k", sim_flags.k, "Components")->capture_default_str();
  sim_cmd->add_option("--q", sim_flags.q, "Factors: one integer or a comma list of K")
      ->capture_default_str();
  sim_cmd->add_option("--separation", sim_flags.separation, "Mean-spread multiplier")
      ->capture_default_str();
  sim_cmd->add_option("--reps", sim_flags.reps, "Number of datasets")->capture_default_str();

  FitCmd fit_flags;
  auto* fit_cmd = app.add_subcommand("fit", "Fit one (K, q) model");
  add_common(fit_cmd, fit_flags.common);
  add_data_flags(fit_cmd, fit_flags.flags);
  fit_cmd->add_option("--k", fit_flags.k, "Components")->required();
  fit_cmd->add_option("--q", fit_flags.q, "Factors: one integer or a comma list of K")
      ->required();
  add_engine_flags(fit_cmd, fit_flags.flags);
  fit_cmd->add_option("--engine", fit_flags.engine, "gmmfad or aecm")
      ->check(CLI::IsMember({"gmmfad", "aecm"}))
      ->capture_default_str();
  fit_cmd->add_flag("--force", fit_flags.force, "Allow the AECM engine above p = 500");

  SelectCmd sel_flags;
  auto* sel_cmd = app.add_subcommand("select", "BIC search over K and q");
  add_common(sel_cmd, sel_flags.common);
  add_data_flags(sel_cmd, sel_flags.flags);
  sel_cmd->add_option("--k-range", sel_flags.k_range, "Component counts, a..b")
      ->capture_default_str();
  sel_cmd->add_option("--q-min", sel_flags.q_min, "Smallest common q")->capture_default_str();
  sel_cmd->add_option("--q-max", sel_flags.q_max, "Largest q")->required();
  sel_cmd->add_flag("--per-cluster-q", sel_flags.per_cluster,
                    "Refine the common-q winner one cluster at a time");
  add_engine_flags(sel_cmd, sel_flags.flags);

  EvalCmd eval_flags;
  auto* eval_cmd = app.add_subcommand("eval", "Compare predicted and true labels");
  add_common(eval_cmd, eval_flags.common);
  eval_cmd->add_option("--pred", eval_flags.pred, "Predicted labels CSV")->required();
  eval_cmd->add_option("--truth", eval_flags.truth, "True labels CSV")->required();
  eval_cmd->add_option("--positive-class", eval_flags.positive_class,
                       "Label treated as positive (default: first seen)");

  BenchCmd bench_flags;
  auto* bench_cmd = app.add_subcommand("bench", "Paired timing of both engines");
  add_common(bench_cmd, bench_flags.common);
  bench_cmd->add_option("--n", bench_flags.n, "Observations")->capture_default_str();
  bench_cmd->add_option("--p", bench_flags.p, "Features")->capture_default_str();
  bench_cmd->add_option("--k", bench_flags.k, "Components")->capture_default_str();
  bench_cmd->add_option("--q", bench_flags.q, "Common factor count")->capture_default_str();
  bench_cmd->add_option("--reps", bench_flags.reps, "Replications")->capture_default_str();
  bench_cmd->add_option("--separation", bench_flags.separation, "Mean-spread multiplier")
      ->capture_default_str();
  bench_cmd->add_option("--starts", bench_flags.starts, "Random starts")->capture_default_str();
  bench_cmd->add_option("--finalists", bench_flags.finalists, "Finalists")->capture_default_str();

  ReportCmd report_flags;
  auto* report_cmd = app.add_subcommand("report", "Loadings table from a fit JSON");
  add_common(report_cmd, report_flags.common);
  report_cmd->add_option("--fit", report_flags.fit_path, "fit.json from fit or select")
      ->required();
  report_cmd->add_option("--suppress-below", report_flags.suppress_below,
                         "Blank loadings with magnitude below this value")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*sim_cmd) {
      return cmd_simulate(sim_flags);
    }
    if (*fit_cmd) {
      return cmd_fit(fit_flags);
    }
    if (*sel_cmd) {
      return cmd_select(sel_flags);
    }
    if (*eval_cmd) {
      return cmd_eval(eval_flags);
    }
    if (*bench_cmd) {
      return cmd_bench(bench_flags);
    }
    return cmd_report(report_flags);
  } catch (const DimensionTooLarge& e) {
    std::cerr << "error (DimensionTooLarge): " << e.what() << "\n";
    return kExitValidation;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ConvergenceError& e) {
    std::cerr << "convergence failure: " << e.what() << "\n";
    return kExitConvergence;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"gmmfad"};
  for (const auto& a : args) {
    argv.push_back(a.c_str());
  }
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace gmmfad::cli
