#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "graphon_lab_cli_test";

int run(const std::string& args, const std::string& stdout_file = "") {
  std::string cmd = std::string(GRAPHON_LAB_CLI) + " " + args;
  cmd += stdout_file.empty() ? " >/dev/null 2>&1" : " >" + stdout_file + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string write_config(const std::string& name, const std::string& body) {
  fs::create_directories(kRoot);
  const auto path = kRoot / name;
  std::ofstream(path) << body;
  return path.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

const char* kSbm = R"({"model": "two_block", "first_proportion": 0.5, "p": 0.6, "q": 0.2,
                       "r": 2, "n": 80, "replications": 12, "seed": 4, "limit_samples": 2000})";

}  // namespace

TEST(Cli, ValidateExitCodes) {
  EXPECT_EQ(run("validate " + write_config("ok.json", kSbm)), 0);
  EXPECT_EQ(run("validate " + write_config("bad.json", R"({"model": "power_kernel", "alpha": 1.5, "r": 1,
                                                            "n": 100, "replications": 10, "seed": 1})")),
            1);
  EXPECT_EQ(run("frobnicate " + write_config("ok.json", kSbm)), 1);
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("--help"), 0);
}

TEST(Cli, SimulateWritesOutputsAndManifest) {
  const auto cfg = write_config("sim.json", kSbm);
  const auto out = kRoot / "sim_out";
  fs::remove_all(out);
  ASSERT_EQ(run("simulate " + cfg + " --out " + out.string() + " --dump-draw"), 0);
  const auto manifest = json::parse(slurp(out / "manifest.json"));
  EXPECT_EQ(manifest["files"].size(), 4u);  // kernel-only: no adjacency dump
  for (const auto& f : manifest["files"]) {
    const auto p = out / f["path"].get<std::string>();
    ASSERT_TRUE(fs::exists(p)) << p;
    EXPECT_GT(fs::file_size(p), 0u);
  }
  const auto report = json::parse(slurp(out / "report.json"));
  EXPECT_EQ(report["regime"], "degenerate");
  EXPECT_EQ(report["replications"], 12);
  EXPECT_EQ(report["config_hash"], manifest["config_hash"]);
}

TEST(Cli, SimulateIsReproducibleAcrossRunsAndThreads) {
  const auto cfg = write_config("repro.json", kSbm);
  const auto a = kRoot / "ra", b = kRoot / "rb", c = kRoot / "rc";
  ASSERT_EQ(run("simulate " + cfg + " --out " + a.string() + " --threads 1"), 0);
  ASSERT_EQ(run("simulate " + cfg + " --out " + b.string() + " --threads 1"), 0);
  ASSERT_EQ(run("simulate " + cfg + " --out " + c.string() + " --threads 8"), 0);
  EXPECT_EQ(slurp(a / "replications.csv"), slurp(b / "replications.csv"));
  EXPECT_EQ(slurp(a / "replications.csv"), slurp(c / "replications.csv"));
}

TEST(Cli, LimitForSymmetricSbm) {
  const auto cfg = write_config("limit.json", kSbm);
  const auto out = (kRoot / "limit_stdout.json").string();
  ASSERT_EQ(run("limit " + cfg, out), 0);
  const auto j = json::parse(slurp(out));
  EXPECT_EQ(j["type"], "weighted_chi_square");
  EXPECT_NEAR(j["coefficients"][0].get<double>(), -0.4, 1e-12);
  // Quantiles of -0.4 (Z^2 - 1): the 0.99 level sits just below 0.4.
  const auto& q = j["quantiles"];
  EXPECT_EQ(q.size(), 9u);
  EXPECT_LT(q.back()["value"].get<double>(), 0.4);
  EXPECT_GT(q.back()["value"].get<double>(), 0.39);
  // 0.01 level: -0.4 (chi2_{0.99} - 1) = -0.4 * 5.6349 = -2.2540.
  EXPECT_NEAR(q.front()["value"].get<double>(), -0.4 * (6.634896601021214 - 1.0), 0.05);
}

TEST(Cli, SpectrumJson) {
  const auto cfg = write_config("spec.json", kSbm);
  const auto dir = kRoot / "spec_out";
  const auto out = (kRoot / "spec_stdout.json").string();
  ASSERT_EQ(run("spectrum " + cfg + " --out " + dir.string(), out), 0);
  const auto j = json::parse(slurp(out));
  EXPECT_NEAR(j["eigenvalues"][0].get<double>(), 0.4, 1e-14);
  EXPECT_NEAR(j["C_r"].get<double>(), -0.8, 1e-13);
  EXPECT_EQ(j["regime"], "degenerate");
  EXPECT_TRUE(fs::exists(dir / "spectrum.json"));
}

TEST(Cli, CompareRuns) {
  const auto cfg = write_config("cmp.json", R"({"model": "two_block", "first_proportion": 0.3333333333333333,
                                                "p": 0.6, "q": 0.2, "r": 2, "n": 100, "replications": 10,
                                                "seed": 2, "ladder": [50, 100], "limit_samples": 1000})");
  const auto out = (kRoot / "cmp_stdout.json").string();
  const int code = run("compare " + cfg, out);
  EXPECT_TRUE(code == 0 || code == 2);
  const auto j = json::parse(slurp(out));
  EXPECT_EQ(j["levels"].size(), 2u);
}

TEST(Cli, AssumptionViolationExitCode) {
  // lambda_2 of a rank-one kernel is zero: an assumption violation, not a numeric failure.
  const auto cfg = write_config("rank1.json", R"({"model": "power_kernel", "alpha": 0.5, "r": 2, "n": 100,
                                                  "replications": 10, "seed": 1})");
  EXPECT_EQ(run("spectrum " + cfg), 1);
}
