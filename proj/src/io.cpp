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

#include "gmmfad/io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>

namespace gmmfad::io {

namespace fs = std::filesystem;

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot write " + tmp.string());
    }
    out << content;
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw std::runtime_error("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot rename " + tmp.string() + ": " + ec.message());
  }
}

std::string format_double(double x) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  (void)ec;
  return std::string(buf.data(), ptr);
}

std::string matrix_csv(const Matrix& m, const std::vector<std::string>& header) {
  std::ostringstream os;
  for (size_t c = 0; c < header.size(); ++c) {
    os << (c ? "," : "") << header[c];
  }
  if (!header.empty()) {
    os << '\n';
  }
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      os << (j ? "," : "") << format_double(m(i, j));
    }
    os << '\n';
  }
  return os.str();
}

std::string labels_csv(std::span<const int> labels, const std::string& header) {
  std::ostringstream os;
  os << header << '\n';
  for (int l : labels) {
    os << l << '\n';
  }
  return os.str();
}

namespace {

nlohmann::json vec(const Vector& v) {
  auto a = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i) {
    a.push_back(v[i]);
  }
  return a;
}

// Row-major nested arrays: one inner array per feature.
nlohmann::json mat(const Matrix& m) {
  auto a = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Index j = 0; j < m.cols(); ++j) {
      row.push_back(m(i, j));
    }
    a.push_back(std::move(row));
  }
  return a;
}

Vector to_vec(const nlohmann::json& a) {
  Vector v(static_cast<Index>(a.size()));
  for (size_t i = 0; i < a.size(); ++i) {
    v[static_cast<Index>(i)] = a[i].get<double>();
  }
  return v;
}

Matrix to_mat(const nlohmann::json& a, Index rows, Index cols) {
  if (static_cast<Index>(a.size()) != rows) {
    throw ValidationError("loadings have " + std::to_string(a.size()) + " rows, expected " +
                          std::to_string(rows));
  }
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const auto& row = a[static_cast<size_t>(i)];
    if (static_cast<Index>(row.size()) != cols) {
      throw ValidationError("ragged loadings row in model JSON");
    }
    for (Index j = 0; j < cols; ++j) {
      m(i, j) = row[static_cast<size_t>(j)].get<double>();
    }
  }
  return m;
}

}  // namespace

nlohmann::json model_to_json(const MixtureModel& model) {
  nlohmann::json j;
  j["schema"] = kModelSchema;
  j["n_components"] = model.n_components();
  j["dim"] = model.dim();
  j["factors"] = model.factor_counts();
  auto comps = nlohmann::json::array();
  for (const auto& c : model.components) {
    comps.push_back({{"weight", c.weight},
                     {"mean", vec(c.mean)},
                     {"uniquenesses", vec(c.uniquenesses)},
                     {"loadings", mat(c.loadings)}});
  }
  j["components"] = std::move(comps);
  return j;
}

MixtureModel model_from_json(const nlohmann::json& j) {
  try {
    MixtureModel model;
    const auto factors = j.at("factors").get<std::vector<int>>();
    const auto& comps = j.at("components");
    if (comps.size() != factors.size()) {
      throw ValidationError("model JSON: factor list and components disagree");
    }
    for (size_t k = 0; k < comps.size(); ++k) {
      ComponentParams c;
      c.weight = comps[k].at("weight").get<double>();
      c.mean = to_vec(comps[k].at("mean"));
      c.uniquenesses = to_vec(comps[k].at("uniquenesses"));
      c.loadings = to_mat(comps[k].at("loadings"), c.mean.size(), factors[k]);
      model.components.push_back(std::move(c));
    }
    validate(model);
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model JSON: ") + e.what());
  }
}

nlohmann::json report_to_json(const FitReport& report, const FitConfig& config) {
  nlohmann::json j;
  j["schema"] = kFitSchema;
  j["engine"] = report.engine;
  j["config"] = {{"n_components", config.n_components},
                 {"factors", config.factors},
                 {"tol", config.tol},
                 {"max_iter", config.max_iter},
                 {"n_random_starts", config.n_random_starts},
                 {"short_run_iters", config.short_run_iters},
                 {"n_finalists", config.n_finalists},
                 {"use_kmeans_start", config.use_kmeans_start},
                 {"seed", config.seed},
                 {"psi_bounds", {config.box.lower, config.box.upper}}};
  j["n"] = report.responsibilities.gamma.rows();
  j["loglik"] = report.loglik;
  j["n_params"] = report.n_params;
  j["bic"] = report.bic;
  j["n_iter"] = report.n_iter;
  j["converged"] = report.converged;
  j["loglik_trace"] = report.loglik_trace;
  j["model"] = model_to_json(report.model);
  return j;
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open " + path.string());
  }
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace gmmfad::io
