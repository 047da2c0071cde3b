// graphon-lab: spectra, limit laws and Monte Carlo eigenvalue fluctuation
// experiments for graphon random graphs.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "graphon_lab/graphon_lab.hpp"

namespace fs = std::filesystem;
using namespace graphon_lab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumeric = 2;

struct Options {
  std::string config_path;
  std::string out_dir;
  bool full_diagnostics = false;
  bool dump_draw = false;
  int threads = -1;
};

ExperimentConfig load(const Options& opt) {
  auto cfg = parse_config(opt.config_path);
  if (!opt.out_dir.empty()) cfg.output_dir = opt.out_dir;
  if (opt.full_diagnostics) cfg.full_diagnostics = true;
  if (opt.dump_draw) cfg.dump_draw = true;
  if (opt.threads >= 0) cfg.threads = opt.threads;
  return cfg;
}

void emit(const json& doc, const Options& opt, const char* filename) {
  std::cout << doc.dump(2) << '\n';
  if (!opt.out_dir.empty()) {
    ensure_writable_dir(opt.out_dir);
    std::ofstream(fs::path(opt.out_dir) / filename) << doc.dump(2) << '\n';
  }
}

int cmd_validate(const Options& opt) {
  const auto cfg = load(opt);
  const auto pm = prepare_model(cfg);
  json j;
  j["status"] = "ok";
  j["config"] = config_to_json(cfg);
  j["config_hash"] = config_hash(cfg);
  j["regime"] = to_string(pm.constants.regime);
  j["edge_sampling_available"] = cfg.model.edge_sampling_available();
  std::cout << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_spectrum(const Options& opt) {
  const auto cfg = load(opt);
  emit(spectrum_to_json(cfg, prepare_model(cfg)), opt, "spectrum.json");
  return kExitOk;
}

int cmd_limit(const Options& opt) {
  const auto cfg = load(opt);
  const auto pm = prepare_model(cfg);
  json j = law_to_json(*pm.law);
  j["regime"] = to_string(pm.constants.regime);
  j["lambda_r"] = pm.constants.lambda_r;
  emit(j, opt, "limit.json");
  return kExitOk;
}

int cmd_simulate(const Options& opt) {
  const auto cfg = load(opt);
  const fs::path dir = cfg.output_dir;
  ensure_writable_dir(dir);
  RunManifest manifest;
  manifest.config_hash = config_hash(cfg);
  manifest.started_at = utc_timestamp();

  const auto report = run_experiment(cfg);
  {
    std::ofstream f(dir / "replications.csv");
    write_records_csv(f, report);
  }
  std::ofstream(dir / "report.json") << report_to_json(report).dump(2) << '\n';
  std::vector<std::string> files = {"replications.csv", "report.json"};
  if (cfg.dump_draw) {
    const auto draw = draw_sample(cfg.model, cfg.n, cfg.seed, 0, cfg.uses_adjacency());
    write_draw_csv(dir, draw);
    files.insert(files.end(), {"draw_latents.csv", "draw_kernel.csv"});
    if (draw.adjacency) files.push_back("draw_adjacency.csv");
  }
  manifest.finished_at = utc_timestamp();
  for (const auto& f : files) manifest.files.emplace_back(f, fs::file_size(dir / f));
  std::ofstream(dir / "manifest.json") << manifest_to_json(manifest).dump(2) << '\n';

  std::cerr << "simulate: " << report.records.size() << " replications, " << report.discarded << " discarded, "
            << report.ambiguous << " ambiguous, regime " << to_string(report.prepared.constants.regime) << '\n';
  for (const auto& e : report.ks) {
    std::cerr << "  KS " << e.statistic << " vs " << e.reference << ": D=" << e.result.statistic
              << " p=" << e.result.p_value << '\n';
  }
  return report.quality_ok ? kExitOk : kExitNumeric;
}

int cmd_compare(const Options& opt) {
  auto cfg = load(opt);
  if (cfg.source != MatrixSource::both) cfg.source = MatrixSource::both;
  validate_config(cfg);
  const auto summary = adjacency_comparison(cfg);
  json levels = json::array();
  bool quality = true;
  for (const auto& l : summary.levels) {
    json ks = json::array();
    for (const auto& e : l.report.ks) {
      ks.push_back({{"statistic", e.statistic}, {"D", e.result.statistic}, {"p_value", e.result.p_value}});
    }
    levels.push_back({{"n", l.n}, {"valid", l.valid}, {"median_abs_diff", l.median_abs_diff},
                      {"p90_abs_diff", l.p90_abs_diff}, {"discarded", l.report.discarded},
                      {"ambiguous", l.report.ambiguous}, {"ks", ks}});
    quality = quality && l.report.quality_ok;
  }
  json j;
  j["config_hash"] = config_hash(cfg);
  j["levels"] = levels;
  j["medians_decreasing"] = summary.medians_decreasing;
  j["status"] = quality ? "ok" : "experiment_quality_error";
  emit(j, opt, "compare.json");
  return quality ? kExitOk : kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graphon-lab: eigenvalue fluctuations of graphon kernel and adjacency matrices"};
  app.require_subcommand(1);
  Options opt;

  const auto add = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("config", opt.config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out_dir, "output directory");
    sub->add_flag("--full-diagnostics", opt.full_diagnostics, "compute every per-replication diagnostic");
    sub->add_flag("--dump-draw", opt.dump_draw, "write replication 0's draw as CSV");
    sub->add_option("--threads", opt.threads, "worker threads (0 = auto)")->check(CLI::NonNegativeNumber);
    return sub;
  };
  auto* spectrum = add("spectrum", "population spectrum and regime constants");
  auto* simulate = add("simulate", "run the Monte Carlo experiment");
  auto* limit = add("limit", "limit law description and quantiles");
  auto* compare = add("compare", "adjacency vs kernel eigenvalue comparison along a size ladder");
  auto* validate_cmd = add("validate", "validate config and model");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (app.exit(e) == 0) return kExitOk;
    std::cerr << app.help();
    return kExitValidation;
  }

  try {
    if (spectrum->parsed()) return cmd_spectrum(opt);
    if (simulate->parsed()) return cmd_simulate(opt);
    if (limit->parsed()) return cmd_limit(opt);
    if (compare->parsed()) return cmd_compare(opt);
    if (validate_cmd->parsed()) return cmd_validate(opt);
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return e.is_numeric() ? kExitNumeric : kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitValidation;
}
