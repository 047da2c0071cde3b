#pragma once

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <string>

#include "graphon_lab/errors.hpp"
#include "graphon_lab/experiment.hpp"
#include "graphon_lab/graphon.hpp"
#include "graphon_lab/random.hpp"

namespace graphon_lab {

using json = nlohmann::json;

namespace detail {

inline const std::set<std::string>& common_keys() {
  static const std::set<std::string> keys = {
      "model", "r", "n", "replications", "seed", "matrix_source", "spectrum", "grid_size", "modes",
      "truncation", "full_diagnostics", "ladder", "limit_samples", "threads", "output_dir", "dump_draw"};
  return keys;
}

inline const std::set<std::string>& model_keys(const std::string& model) {
  static const std::set<std::string> none;
  static const std::set<std::string> block = {"proportions", "connectivity"};
  static const std::set<std::string> two_block = {"first_proportion", "p", "q"};
  static const std::set<std::string> power = {"alpha"};
  static const std::set<std::string> grid = {"grid"};
  static const std::set<std::string> constant = {"value"};
  if (model == "block_model") return block;
  if (model == "two_block") return two_block;
  if (model == "power_kernel") return power;
  if (model == "grid_kernel") return grid;
  if (model == "constant") return constant;
  return none;
}

inline const json& require(const json& j, const std::string& key) {
  if (!j.contains(key)) fail(ErrorKind::config, "/" + key + ": required field missing");
  return j.at(key);
}

inline double get_number(const json& j, const std::string& key) {
  const auto& v = require(j, key);
  if (!v.is_number()) fail(ErrorKind::config, "/" + key + ": must be a number");
  return v.get<double>();
}

inline std::int64_t get_integer(const json& j, const std::string& key) {
  const auto& v = require(j, key);
  if (!v.is_number_integer()) fail(ErrorKind::config, "/" + key + ": must be an integer");
  return v.get<std::int64_t>();
}

inline Eigen::MatrixXd get_matrix(const json& j, const std::string& key) {
  const auto& v = require(j, key);
  if (!v.is_array() || v.empty()) fail(ErrorKind::config, "/" + key + ": must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(v.size());
  Eigen::MatrixXd m(rows, rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = v[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != rows) {
      fail(ErrorKind::config, "/" + key + "/" + std::to_string(i) + ": rows must form a square matrix");
    }
    for (Eigen::Index k = 0; k < rows; ++k) {
      const auto& x = row[static_cast<std::size_t>(k)];
      if (!x.is_number()) fail(ErrorKind::config, "/" + key + "/" + std::to_string(i) + "/" + std::to_string(k) + ": must be a number");
      m(i, k) = x.get<double>();
    }
  }
  return m;
}

inline GraphonModel parse_model(const json& j) {
  const auto& m = require(j, "model");
  if (!m.is_string()) fail(ErrorKind::config, "/model: must be a string");
  const auto name = m.get<std::string>();
  if (name == "power_kernel") {
    const double a = get_number(j, "alpha");
    if (!(a > 0.0 && a < 1.0)) fail(ErrorKind::config, "/alpha: alpha must lie in (0,1)");
    return power_kernel(a);
  }
  if (name == "brownian_sqrt") return brownian_sqrt();
  if (name == "constant") return constant_graphon(get_number(j, "value"));
  if (name == "two_block") {
    return two_block_model(get_number(j, "first_proportion"), get_number(j, "p"), get_number(j, "q"));
  }
  if (name == "block_model") {
    const auto& pv = require(j, "proportions");
    if (!pv.is_array() || pv.empty()) fail(ErrorKind::config, "/proportions: must be a non-empty array");
    std::vector<double> pi;
    for (const auto& x : pv) {
      if (!x.is_number()) fail(ErrorKind::config, "/proportions: entries must be numbers");
      pi.push_back(x.get<double>());
    }
    auto P = get_matrix(j, "connectivity");
    if (static_cast<std::size_t>(P.rows()) != pi.size()) {
      fail(ErrorKind::config, "/connectivity: size must match /proportions");
    }
    return block_model(std::move(pi), std::move(P));
  }
  if (name == "grid_kernel") return grid_kernel(get_matrix(j, "grid"));
  fail(ErrorKind::config, "/model: unknown model '" + name +
                              "' (expected block_model, two_block, power_kernel, brownian_sqrt, grid_kernel, constant)");
}

}  // namespace detail

/// Builds a validated ExperimentConfig from a JSON document. Unknown keys are
/// rejected. See docs/config-schema.md.
inline ExperimentConfig parse_config_json(const json& j) {
  if (!j.is_object()) fail(ErrorKind::config, "/: config must be a JSON object");
  const std::string model_name = j.contains("model") && j["model"].is_string() ? j["model"].get<std::string>() : "";
  const auto& allowed_model = detail::model_keys(model_name);
  for (const auto& [key, _] : j.items()) {
    if (!detail::common_keys().count(key) && !allowed_model.count(key)) {
      fail(ErrorKind::config, "/" + key + ": unknown key");
    }
  }

  ExperimentConfig cfg{.model = detail::parse_model(j)};
  const auto r = detail::get_integer(j, "r");
  if (r < 1) fail(ErrorKind::config, "/r: must be at least 1");
  cfg.r = static_cast<std::size_t>(r);
  cfg.n = static_cast<int>(detail::get_integer(j, "n"));
  cfg.replications = static_cast<int>(detail::get_integer(j, "replications"));
  const auto& seed = detail::require(j, "seed");
  if (!seed.is_number_integer()) fail(ErrorKind::config, "/seed: must be an integer");
  cfg.seed = seed.is_number_unsigned() ? seed.get<std::uint64_t>() : static_cast<std::uint64_t>(seed.get<std::int64_t>());

  if (j.contains("matrix_source")) {
    const auto s = j["matrix_source"].is_string() ? j["matrix_source"].get<std::string>() : "";
    if (s == "kernel") cfg.source = MatrixSource::kernel;
    else if (s == "adjacency") cfg.source = MatrixSource::adjacency;
    else if (s == "both") cfg.source = MatrixSource::both;
    else fail(ErrorKind::config, "/matrix_source: expected kernel, adjacency or both");
  }
  if (j.contains("spectrum")) {
    const auto s = j["spectrum"].is_string() ? j["spectrum"].get<std::string>() : "";
    if (s == "auto") cfg.spectrum_method = SpectrumMethod::automatic;
    else if (s == "analytic") cfg.spectrum_method = SpectrumMethod::analytic;
    else if (s == "nystrom") cfg.spectrum_method = SpectrumMethod::nystrom;
    else fail(ErrorKind::config, "/spectrum: expected auto, analytic or nystrom");
  }
  if (j.contains("grid_size")) cfg.grid_size = static_cast<int>(detail::get_integer(j, "grid_size"));
  if (j.contains("modes")) cfg.modes = static_cast<int>(detail::get_integer(j, "modes"));
  if (cfg.grid_size < 64) fail(ErrorKind::config, "/grid_size: must be at least 64");
  if (cfg.modes < 1 || cfg.modes > cfg.grid_size) fail(ErrorKind::config, "/modes: must lie in [1, grid_size]");
  if (j.contains("truncation") && !j["truncation"].is_null()) {
    const auto t = detail::get_integer(j, "truncation");
    if (t < static_cast<std::int64_t>(cfg.r)) fail(ErrorKind::config, "/truncation: must be at least r");
    cfg.truncation = static_cast<std::size_t>(t);
  }
  if (j.contains("full_diagnostics")) {
    if (!j["full_diagnostics"].is_boolean()) fail(ErrorKind::config, "/full_diagnostics: must be a boolean");
    cfg.full_diagnostics = j["full_diagnostics"].get<bool>();
  }
  if (j.contains("dump_draw")) {
    if (!j["dump_draw"].is_boolean()) fail(ErrorKind::config, "/dump_draw: must be a boolean");
    cfg.dump_draw = j["dump_draw"].get<bool>();
  }
  if (j.contains("ladder")) {
    const auto& l = j["ladder"];
    if (!l.is_array() || l.empty()) fail(ErrorKind::config, "/ladder: must be a non-empty array of sizes");
    for (std::size_t i = 0; i < l.size(); ++i) {
      if (!l[i].is_number_integer() || l[i].get<int>() < 50 || l[i].get<int>() > kMaxVertices) {
        fail(ErrorKind::config, "/ladder/" + std::to_string(i) + ": sizes must be integers in [50, 8192]");
      }
      cfg.ladder.push_back(l[i].get<int>());
    }
  }
  if (j.contains("limit_samples")) {
    cfg.limit_samples = static_cast<int>(detail::get_integer(j, "limit_samples"));
    if (cfg.limit_samples < 10) fail(ErrorKind::config, "/limit_samples: must be at least 10");
  }
  if (j.contains("threads")) {
    cfg.threads = static_cast<int>(detail::get_integer(j, "threads"));
    if (cfg.threads < 0) fail(ErrorKind::config, "/threads: must be non-negative");
  }
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) fail(ErrorKind::config, "/output_dir: must be a string");
    cfg.output_dir = j["output_dir"].get<std::string>();
  }
  validate_config(cfg);
  return cfg;
}

inline ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::config, "cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    fail(ErrorKind::config, std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config_json(j);
}

inline json model_to_json(const GraphonModel& model) {
  json j;
  j["type"] = model.kind();
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        const auto matrix = [](const Eigen::MatrixXd& x) {
          json rows = json::array();
          for (Eigen::Index i = 0; i < x.rows(); ++i) {
            json row = json::array();
            for (Eigen::Index k = 0; k < x.cols(); ++k) row.push_back(x(i, k));
            rows.push_back(row);
          }
          return rows;
        };
        if constexpr (std::is_same_v<T, BlockModel>) {
          j["proportions"] = m.proportions;
          j["connectivity"] = matrix(m.connectivity);
        } else if constexpr (std::is_same_v<T, PowerKernel>) {
          j["alpha"] = m.alpha;
        } else if constexpr (std::is_same_v<T, GridKernel>) {
          j["grid"] = matrix(m.values);
        }
      },
      model.variant());
  return j;
}

/// Effective configuration with defaults applied. Thread count and output
/// location do not affect results and are left out.
inline json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["model"] = model_to_json(cfg.model);
  j["r"] = cfg.r;
  j["n"] = cfg.n;
  j["replications"] = cfg.replications;
  j["seed"] = cfg.seed;
  j["matrix_source"] = to_string(cfg.source);
  j["spectrum"] = to_string(cfg.spectrum_method);
  j["grid_size"] = cfg.grid_size;
  j["modes"] = cfg.modes;
  j["truncation"] = cfg.truncation ? json(*cfg.truncation) : json(nullptr);
  j["full_diagnostics"] = cfg.full_diagnostics;
  j["ladder"] = cfg.ladder.empty() ? default_ladder(cfg.n) : cfg.ladder;
  j["limit_samples"] = cfg.limit_samples;
  return j;
}

/// FNV-1a of the canonical effective-config dump, as 16 hex digits.
inline std::string config_hash(const ExperimentConfig& cfg) {
  const auto h = detail::fnv1a(config_to_json(cfg).dump());
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace graphon_lab
