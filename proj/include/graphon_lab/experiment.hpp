#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "graphon_lab/decomp.hpp"
#include "graphon_lab/eigensolver.hpp"
#include "graphon_lab/errors.hpp"
#include "graphon_lab/graphon.hpp"
#include "graphon_lab/limits.hpp"
#include "graphon_lab/matching.hpp"
#include "graphon_lab/random.hpp"
#include "graphon_lab/sample.hpp"
#include "graphon_lab/spectrum.hpp"
#include "graphon_lab/statistics.hpp"

namespace graphon_lab {

enum class MatrixSource { kernel, adjacency, both };
enum class SpectrumMethod { automatic, analytic, nystrom };

inline const char* to_string(MatrixSource s) {
  switch (s) {
    case MatrixSource::kernel: return "kernel";
    case MatrixSource::adjacency: return "adjacency";
    case MatrixSource::both: return "both";
  }
  return "kernel";
}

inline const char* to_string(SpectrumMethod m) {
  switch (m) {
    case SpectrumMethod::automatic: return "auto";
    case SpectrumMethod::analytic: return "analytic";
    case SpectrumMethod::nystrom: return "nystrom";
  }
  return "auto";
}

struct ExperimentConfig {
  GraphonModel model = power_kernel(0.5);
  std::size_t r = 1;
  MatrixSource source = MatrixSource::kernel;
  int n = 500;
  int replications = 100;
  std::uint64_t seed = 1;
  SpectrumMethod spectrum_method = SpectrumMethod::automatic;
  int grid_size = 1024;
  int modes = 16;
  std::optional<std::size_t> truncation;
  bool full_diagnostics = false;
  std::vector<int> ladder;
  /// Reference draws from the limit law for two-sample KS tests.
  int limit_samples = 100'000;
  int threads = 0;
  std::string output_dir = "out";
  bool dump_draw = false;

  bool uses_kernel() const { return source != MatrixSource::adjacency; }
  bool uses_adjacency() const { return source != MatrixSource::kernel; }
};

/// Spectrum, constants and limit law shared read-only by all replications.
struct PreparedModel {
  SpectralData spectrum;
  RegimeConstants constants;
  std::optional<LimitLaw> law;
};

inline SpectralData compute_spectrum(const ExperimentConfig& cfg) {
  const bool finite_rank = cfg.model.holds<BlockModel>() || cfg.model.holds<PowerKernel>();
  switch (cfg.spectrum_method) {
    case SpectrumMethod::analytic: return analytic_spectrum(cfg.model);
    case SpectrumMethod::nystrom: return nystrom_spectrum(cfg.model, cfg.grid_size, cfg.modes);
    case SpectrumMethod::automatic:
      return finite_rank ? analytic_spectrum(cfg.model) : nystrom_spectrum(cfg.model, cfg.grid_size, cfg.modes);
  }
  return analytic_spectrum(cfg.model);
}

inline PreparedModel prepare_model(const ExperimentConfig& cfg) {
  PreparedModel p{compute_spectrum(cfg), {}, std::nullopt};
  p.constants = regime_constants(p.spectrum, cfg.r, cfg.truncation);
  if (p.constants.regime == Regime::non_degenerate) {
    p.law = gaussian_law(p.constants);
  } else {
    p.law = chi_square_law(p.spectrum, p.constants, cfg.truncation);
  }
  return p;
}

/// Matched eigenvalue of one matrix and the two centered statistics of it.
struct MatrixStatistics {
  MatchedEigenvalue match;
  /// sqrt(n) (lambda/(n-1) - lambda_r)
  double nondeg = 0.0;
  /// lambda - (n-1) lambda_r - C_r
  double deg = 0.0;
};

struct Diagnostics {
  std::optional<double> V_rn;
  std::optional<double> rayleigh;
  std::optional<double> hoeffding_linear;
  std::optional<double> hoeffding_degenerate;
  bool kt_verified = false;
  bool kt_contained = false;
  std::optional<KatoTempleInterval> kato_temple;
  std::optional<double> resolvent;
  std::optional<double> degenerate_ustat;
  std::optional<double> degenerate_form;
  std::vector<std::size_t> cross_modes;
  std::vector<double> cross_values;
};

struct FluctuationRecord {
  std::uint64_t rep = 0;
  bool discarded = false;
  std::string discard_reason;
  bool ambiguous = false;
  std::optional<MatrixStatistics> kernel;
  std::optional<MatrixStatistics> adjacency;
  /// sqrt(n) (lambda_r(A_n) - lambda_r(K_n)) / (n-1)
  std::optional<double> adj_diff;
  Diagnostics diag;

  /// Statistics of the primary matrix (kernel when computed, else adjacency).
  const std::optional<MatrixStatistics>& primary() const { return kernel ? kernel : adjacency; }
};

namespace detail {

inline MatrixStatistics matrix_statistics(const EigenDecomposition& eig, const RegimeConstants& c,
                                          Eigen::Index n) {
  MatrixStatistics s;
  s.match = match_target(eig, c, n);
  const double nm1 = static_cast<double>(n - 1);
  s.nondeg = std::sqrt(static_cast<double>(n)) * (s.match.value / nm1 - c.lambda_r);
  s.deg = s.match.value - nm1 * c.lambda_r - c.C_r;
  return s;
}

inline bool wants_degenerate_diagnostics(const ExperimentConfig& cfg, const PreparedModel& pm) {
  return cfg.full_diagnostics || pm.constants.regime == Regime::degenerate;
}

inline void fill_diagnostics(const ExperimentConfig& cfg, const PreparedModel& pm, const SampleDraw& draw,
                             const std::optional<EigenDecomposition>& kernel_eig, FluctuationRecord& rec) {
  const auto& c = pm.constants;
  const Eigen::Index n = draw.n();
  const Eigen::VectorXd phi = pm.spectrum.phi(c.r).evaluate_many(draw.latents);
  const auto h = hoeffding_decompose(draw.kernel, phi, c.lambda_r);
  rec.diag.V_rn = h.V_rn;
  rec.diag.hoeffding_linear = h.linear;
  rec.diag.hoeffding_degenerate = h.degenerate;
  rec.diag.rayleigh = rayleigh_quotient(draw.kernel, phi);

  const Eigen::VectorXd u = phi / phi.norm();
  if (kernel_eig && rec.kernel) {
    // Window of half-width (n-1) gamma_r / 2 around (n-1) lambda_r.
    const double nm1 = static_cast<double>(n - 1);
    const double alpha = nm1 * (c.lambda_r - 0.5 * c.gap);
    const double beta = nm1 * (c.lambda_r + 0.5 * c.gap);
    const double eta = *rec.diag.rayleigh;
    if (single_eigenvalue_in(kernel_eig->values, alpha, beta) && alpha < eta && eta < beta) {
      rec.diag.kato_temple = kato_temple_interval(draw.kernel, u, alpha, beta);
      rec.diag.kt_verified = true;
      rec.diag.kt_contained = rec.diag.kato_temple->contains(rec.kernel->match.value);
    }
  }

  if (!wants_degenerate_diagnostics(cfg, pm)) return;
  const std::size_t K = std::min(cfg.truncation.value_or(pm.spectrum.size()), pm.spectrum.size());
  const auto cp = cross_projections(pm.spectrum, c.r, draw.latents, K);
  rec.diag.cross_modes = cp.modes;
  rec.diag.cross_values = cp.values;
  rec.diag.degenerate_ustat = degenerate_ustatistic(draw.kernel, phi, c.lambda_r);
  if (pm.spectrum.rank_exact) {
    rec.diag.degenerate_form = finite_rank_degenerate_form(pm.spectrum, c.r, draw.latents);
  }
  rec.diag.resolvent = resolvent_correction(draw.kernel, u, c.lambda_r, static_cast<std::size_t>(n));
}

}  // namespace detail

/// One replication, deterministic in (seed, rep). Numeric failures mark the
/// record discarded instead of propagating.
inline FluctuationRecord run_replication(const ExperimentConfig& cfg, const PreparedModel& pm,
                                         std::uint64_t rep, SampleDraw* keep_draw = nullptr) {
  FluctuationRecord rec;
  rec.rep = rep;
  try {
    SampleDraw draw = draw_sample(cfg.model, cfg.n, cfg.seed, rep, cfg.uses_adjacency());
    const Eigen::Index n = draw.n();
    std::optional<EigenDecomposition> kernel_eig;
    if (cfg.uses_kernel()) {
      kernel_eig = symmetric_eigen(draw.kernel, false);
      rec.kernel = detail::matrix_statistics(*kernel_eig, pm.constants, n);
    }
    if (cfg.uses_adjacency()) {
      const auto adj_eig = symmetric_eigen(*draw.adjacency, false);
      rec.adjacency = detail::matrix_statistics(adj_eig, pm.constants, n);
    }
    rec.ambiguous = (rec.kernel && !rec.kernel->match.unambiguous) ||
                    (rec.adjacency && !rec.adjacency->match.unambiguous);
    if (rec.ambiguous) {
      rec.kernel.reset();
      rec.adjacency.reset();
    } else if (rec.kernel && rec.adjacency) {
      rec.adj_diff = std::sqrt(static_cast<double>(n)) *
                     (rec.adjacency->match.value - rec.kernel->match.value) / static_cast<double>(n - 1);
    }
    if (!rec.ambiguous) detail::fill_diagnostics(cfg, pm, draw, kernel_eig, rec);
    if (keep_draw) *keep_draw = std::move(draw);
  } catch (const Error& e) {
    if (!e.is_numeric()) throw;
    rec = FluctuationRecord{};
    rec.rep = rep;
    rec.discarded = true;
    rec.discard_reason = e.what();
  }
  return rec;
}

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs the given replication indices on `threads` workers; the result is
/// ordered like `indices` regardless of scheduling.
inline std::vector<FluctuationRecord> run_replications(const ExperimentConfig& cfg, const PreparedModel& pm,
                                                       const std::vector<std::uint64_t>& indices, int threads) {
  std::vector<FluctuationRecord> out(indices.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < indices.size(); i = next++) out[i] = run_replication(cfg, pm, indices[i]);
  };
  const int t = std::max(1, std::min<int>(resolve_threads(threads), static_cast<int>(indices.size())));
  if (t == 1) {
    worker();
    return out;
  }
  std::vector<std::thread> pool;
  for (int k = 0; k < t; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return out;
}

struct KsEntry {
  std::string statistic;
  std::string reference;
  std::size_t samples = 0;
  KsResult result;
};

struct ExperimentReport {
  ExperimentConfig config;
  PreparedModel prepared;
  std::vector<FluctuationRecord> records;
  std::size_t discarded = 0;
  std::size_t ambiguous = 0;
  std::map<std::string, std::size_t> discard_reasons;
  std::map<std::string, SummaryStats> summaries;
  std::vector<KsEntry> ks;
  bool quality_ok = true;
  double wall_clock_seconds = 0.0;

  /// Non-discarded records (the per-replication table).
  std::vector<const FluctuationRecord*> table() const {
    std::vector<const FluctuationRecord*> t;
    for (const auto& r : records) if (!r.discarded) t.push_back(&r);
    return t;
  }
};

/// Collects one statistic over records where it is available.
template <class Getter>
std::vector<double> collect(const std::vector<FluctuationRecord>& records, Getter get) {
  std::vector<double> out;
  for (const auto& r : records) {
    if (r.discarded || r.ambiguous) continue;
    if (auto v = get(r)) out.push_back(*v);
  }
  return out;
}

namespace statistic {
inline std::optional<double> kernel_nondeg(const FluctuationRecord& r) {
  return r.kernel ? std::optional(r.kernel->nondeg) : std::nullopt;
}
inline std::optional<double> kernel_deg(const FluctuationRecord& r) {
  return r.kernel ? std::optional(r.kernel->deg) : std::nullopt;
}
inline std::optional<double> adjacency_nondeg(const FluctuationRecord& r) {
  return r.adjacency ? std::optional(r.adjacency->nondeg) : std::nullopt;
}
inline std::optional<double> adjacency_deg(const FluctuationRecord& r) {
  return r.adjacency ? std::optional(r.adjacency->deg) : std::nullopt;
}
inline std::optional<double> adj_diff(const FluctuationRecord& r) { return r.adj_diff; }
inline std::optional<double> V_rn(const FluctuationRecord& r) { return r.diag.V_rn; }
inline std::optional<double> resolvent(const FluctuationRecord& r) { return r.diag.resolvent; }
}  // namespace statistic

/// KS test of `values` against the regime's limit law: one-sample against the
/// Gaussian CDF, two-sample against reference draws for the chi-square series.
inline KsEntry ks_against_law(const std::string& name, const std::vector<double>& values, const LimitLaw& law,
                              std::uint64_t seed, int reference_samples) {
  KsEntry e;
  e.statistic = name;
  e.samples = values.size();
  if (law.is_gaussian()) {
    e.reference = "gaussian_cdf";
    e.result = ks_one_sample(values, [&law](double x) { return law_cdf(law, x); });
  } else {
    e.reference = "limit_samples";
    RandomStream stream(seed, 0, streams::limit);
    const auto reference = sample_law(law, static_cast<std::size_t>(reference_samples), stream);
    e.result = ks_two_sample(values, reference);
  }
  return e;
}

/// Discarded plus ambiguous replications above this fraction fail the run.
inline constexpr double kMaxDiscardFraction = 0.2;

inline ExperimentReport assemble_report(const ExperimentConfig& cfg, PreparedModel pm,
                                        std::vector<FluctuationRecord> records) {
  ExperimentReport rep;
  rep.config = cfg;
  rep.prepared = std::move(pm);
  rep.records = std::move(records);
  for (const auto& r : rep.records) {
    if (r.discarded) {
      ++rep.discarded;
      ++rep.discard_reasons[r.discard_reason];
    } else if (r.ambiguous) {
      ++rep.ambiguous;
    }
  }
  const auto add = [&](const char* name, auto getter) {
    auto v = collect(rep.records, getter);
    if (!v.empty()) rep.summaries[name] = summarize(v);
  };
  add("statistic_nondeg", statistic::kernel_nondeg);
  add("statistic_deg", statistic::kernel_deg);
  add("statistic_adj_nondeg", statistic::adjacency_nondeg);
  add("statistic_adj_deg", statistic::adjacency_deg);
  add("statistic_adj_diff", statistic::adj_diff);
  add("V_rn", statistic::V_rn);
  add("resolvent_correction", statistic::resolvent);

  const auto& law = *rep.prepared.law;
  const bool gaussian = law.is_gaussian();
  const auto test = [&](const char* name, auto getter) {
    auto v = collect(rep.records, getter);
    if (v.size() >= kKsMinimumSamples) rep.ks.push_back(ks_against_law(name, v, law, cfg.seed, cfg.limit_samples));
  };
  if (cfg.uses_kernel()) test(gaussian ? "statistic_nondeg" : "statistic_deg", gaussian ? statistic::kernel_nondeg : statistic::kernel_deg);
  if (cfg.uses_adjacency()) test(gaussian ? "statistic_adj_nondeg" : "statistic_adj_deg", gaussian ? statistic::adjacency_nondeg : statistic::adjacency_deg);

  const double bad = static_cast<double>(rep.discarded + rep.ambiguous);
  rep.quality_ok = bad <= kMaxDiscardFraction * static_cast<double>(rep.records.size());
  return rep;
}

inline void validate_config(const ExperimentConfig& cfg) {
  if (cfg.n < 50) fail(ErrorKind::config, "n must be at least 50");
  if (cfg.n > kMaxVertices) fail(ErrorKind::config, "n must not exceed 8192");
  if (cfg.replications < 10) fail(ErrorKind::config, "replications must be at least 10");
  if (cfg.r < 1) fail(ErrorKind::config, "r must be at least 1");
  if (cfg.uses_adjacency() && !cfg.model.edge_sampling_available()) {
    fail(ErrorKind::config, "edge sampling requires sup norm <= 1");
  }
  const auto report = validate(cfg.model);
  if (!report.ok()) fail(ErrorKind::config, report.violations.front());
}

inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const auto start = std::chrono::steady_clock::now();
  PreparedModel pm = prepare_model(cfg);
  std::vector<std::uint64_t> indices(static_cast<std::size_t>(cfg.replications));
  for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
  auto records = run_replications(cfg, pm, indices, cfg.threads);
  auto report = assemble_report(cfg, std::move(pm), std::move(records));
  report.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

struct LadderLevel {
  int n = 0;
  std::size_t valid = 0;
  double median_abs_diff = 0.0;
  double p90_abs_diff = 0.0;
  ExperimentReport report;
};

struct ComparisonSummary {
  std::vector<LadderLevel> levels;
  /// Medians strictly decreasing along the ladder.
  bool medians_decreasing = false;
};

inline std::vector<int> default_ladder(int n) { return {std::max(50, n / 4), std::max(50, n / 2), n}; }

/// |sqrt(n)(lambda_r(A_n) - lambda_r(K_n))/(n-1)| along a ladder of sizes.
inline ComparisonSummary adjacency_comparison(const ExperimentConfig& cfg) {
  if (cfg.source != MatrixSource::both) fail(ErrorKind::config, "compare requires matrix_source = both");
  ComparisonSummary out;
  auto ladder = cfg.ladder.empty() ? default_ladder(cfg.n) : cfg.ladder;
  std::sort(ladder.begin(), ladder.end());
  for (int n : ladder) {
    ExperimentConfig level = cfg;
    level.n = n;
    // Independent draws per level rather than nested latent prefixes.
    level.seed = RandomStream::derive_key(cfg.seed, static_cast<std::uint64_t>(n), "ladder");
    LadderLevel row;
    row.n = n;
    row.report = run_experiment(level);
    auto diffs = collect(row.report.records, statistic::adj_diff);
    for (double& d : diffs) d = std::abs(d);
    row.valid = diffs.size();
    row.median_abs_diff = median(diffs);
    row.p90_abs_diff = quantile(diffs, 0.9);
    out.levels.push_back(std::move(row));
  }
  out.medians_decreasing = true;
  for (std::size_t i = 1; i < out.levels.size(); ++i) {
    out.medians_decreasing = out.medians_decreasing &&
                             out.levels[i].median_abs_diff < out.levels[i - 1].median_abs_diff;
  }
  return out;
}

}  // namespace graphon_lab
