#pragma once

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "graphon_lab/config.hpp"
#include "graphon_lab/experiment.hpp"
#include "graphon_lab/limits.hpp"
#include "graphon_lab/spectrum.hpp"

namespace graphon_lab {

inline constexpr const char* kToolVersion = "0.3.0";

namespace detail {

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace detail

inline json spectrum_to_json(const ExperimentConfig& cfg, const PreparedModel& pm) {
  const auto& s = pm.spectrum;
  const auto& c = pm.constants;
  json j;
  j["model"] = model_to_json(cfg.model);
  j["provenance"] = to_string(s.provenance);
  if (s.provenance == Provenance::nystrom) j["grid_size"] = s.grid_size;
  j["rank_exact"] = s.rank_exact;
  j["eigenvalues"] = s.eigenvalues;
  j["r"] = c.r;
  j["lambda_r"] = c.lambda_r;
  j["sigma_sq"] = c.sigma_sq;
  j["gap"] = c.gap;
  j["C_r"] = c.C_r;
  j["tail_bound"] = c.tail_bound;
  j["regime"] = to_string(c.regime);
  return j;
}

inline json law_to_json(const LimitLaw& law) {
  json j;
  if (law.is_gaussian()) {
    j["type"] = "gaussian";
    j["variance"] = law.gaussian().variance;
  } else {
    const auto& w = law.chi_square();
    j["type"] = "weighted_chi_square";
    j["modes"] = w.modes;
    j["coefficients"] = w.coefficients;
    j["centering"] = w.centering;
    j["truncation"] = w.truncation;
    j["tail_sq_mass"] = w.tail_sq_mass;
    j["variance"] = law.variance();
  }
  j["cdf_accuracy"] = law_cdf_accuracy(law);
  json q = json::array();
  for (double p : kQuantileLevels) q.push_back({{"level", p}, {"value", law_quantile(law, p)}});
  j["quantiles"] = q;
  return j;
}

inline json summary_to_json(const SummaryStats& s) {
  return {{"count", s.count}, {"mean", s.mean}, {"variance", s.variance}, {"skewness", s.skewness}, {"kurtosis", s.kurtosis}};
}

inline json report_to_json(const ExperimentReport& rep) {
  json j;
  j["config"] = config_to_json(rep.config);
  j["config_hash"] = config_hash(rep.config);
  j["spectrum"] = spectrum_to_json(rep.config, rep.prepared);
  j["limit_law"] = law_to_json(*rep.prepared.law);
  j["regime"] = to_string(rep.prepared.constants.regime);
  j["replications"] = rep.records.size();
  j["table_rows"] = rep.records.size() - rep.discarded;
  j["discarded"] = rep.discarded;
  j["ambiguous"] = rep.ambiguous;
  j["discard_reasons"] = rep.discard_reasons;
  json summaries = json::object();
  for (const auto& [name, s] : rep.summaries) summaries[name] = summary_to_json(s);
  j["summary"] = summaries;
  json ks = json::array();
  for (const auto& e : rep.ks) {
    ks.push_back({{"statistic", e.statistic}, {"reference", e.reference}, {"samples", e.samples},
                  {"D", e.result.statistic}, {"p_value", e.result.p_value}});
  }
  j["ks"] = ks;
  j["status"] = rep.quality_ok ? "ok" : "experiment_quality_error";
  j["wall_clock_seconds"] = rep.wall_clock_seconds;
  return j;
}

/// Per-replication table; discarded replications are not rows.
inline void write_records_csv(std::ostream& os, const ExperimentReport& rep) {
  const auto& cfg = rep.config;
  const bool both = cfg.source == MatrixSource::both;
  const bool deg_diag = cfg.full_diagnostics || rep.prepared.constants.regime == Regime::degenerate;
  std::vector<std::size_t> cross_modes;
  for (const auto& r : rep.records) {
    if (!r.diag.cross_modes.empty()) {
      cross_modes = r.diag.cross_modes;
      break;
    }
  }

  os << "rep,matched_value,statistic_nondeg,statistic_deg,statistic_adj_diff,ambiguous";
  if (both) os << ",matched_adjacency,statistic_adj_nondeg,statistic_adj_deg";
  os << ",V_rn,rayleigh,hoeffding_linear,hoeffding_degenerate,kt_verified,kt_lower,kt_upper,kt_contained";
  if (deg_diag) {
    os << ",resolvent_correction,degenerate_ustat,degenerate_form";
    for (auto k : cross_modes) os << ",T_" << k;
  }
  os << '\n';

  for (const auto* r : rep.table()) {
    const auto& p = r->primary();
    os << r->rep << ',' << (p ? detail::format_double(p->match.value) : "") << ','
       << (p ? detail::format_double(p->nondeg) : "") << ',' << (p ? detail::format_double(p->deg) : "") << ','
       << detail::cell(r->adj_diff) << ',' << (r->ambiguous ? 1 : 0);
    if (both) {
      const auto& a = r->adjacency;
      os << ',' << (a ? detail::format_double(a->match.value) : "") << ',' << (a ? detail::format_double(a->nondeg) : "")
         << ',' << (a ? detail::format_double(a->deg) : "");
    }
    const auto& d = r->diag;
    os << ',' << detail::cell(d.V_rn) << ',' << detail::cell(d.rayleigh) << ',' << detail::cell(d.hoeffding_linear)
       << ',' << detail::cell(d.hoeffding_degenerate) << ',' << (d.kt_verified ? 1 : 0) << ','
       << (d.kato_temple ? detail::format_double(d.kato_temple->lower) : "") << ','
       << (d.kato_temple ? detail::format_double(d.kato_temple->upper) : "") << ',' << (d.kt_contained ? 1 : 0);
    if (deg_diag) {
      os << ',' << detail::cell(d.resolvent) << ',' << detail::cell(d.degenerate_ustat) << ','
         << detail::cell(d.degenerate_form);
      for (std::size_t i = 0; i < cross_modes.size(); ++i) {
        os << ',' << (i < d.cross_values.size() ? detail::format_double(d.cross_values[i]) : "");
      }
    }
    os << '\n';
  }
}

inline void write_draw_csv(const std::filesystem::path& dir, const SampleDraw& draw) {
  {
    std::ofstream f(dir / "draw_latents.csv");
    f << "i,u\n";
    for (std::size_t i = 0; i < draw.latents.size(); ++i) f << i << ',' << detail::format_double(draw.latents[i]) << '\n';
  }
  const auto dump = [](const std::filesystem::path& path, const Eigen::MatrixXd& m) {
    std::ofstream f(path);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index k = 0; k < m.cols(); ++k) f << (k ? "," : "") << detail::format_double(m(i, k));
      f << '\n';
    }
  };
  dump(dir / "draw_kernel.csv", draw.kernel);
  if (draw.adjacency) dump(dir / "draw_adjacency.csv", *draw.adjacency);
}

/// Run manifest: tool version, config hash, timestamps and file inventory.
struct RunManifest {
  std::string tool_version = kToolVersion;
  std::string config_hash;
  std::string started_at;
  std::string finished_at;
  std::vector<std::pair<std::string, std::uintmax_t>> files;
};

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline json manifest_to_json(const RunManifest& m) {
  json files = json::array();
  for (const auto& [name, size] : m.files) files.push_back({{"path", name}, {"bytes", size}});
  return {{"tool_version", m.tool_version}, {"config_hash", m.config_hash}, {"started_at", m.started_at},
          {"finished_at", m.finished_at}, {"files", files}};
}

/// Creates `dir` if needed and checks a file can be written there.
inline void ensure_writable_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto probe = dir / ".write_probe";
  {
    std::ofstream f(probe);
    if (!f) fail(ErrorKind::config, "output directory '" + dir.string() + "' is not writable");
  }
  std::filesystem::remove(probe, ec);
}

}  // namespace graphon_lab
