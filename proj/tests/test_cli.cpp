#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <json.hpp>

#include "se3nav/gp.hpp"
#include "se3nav/plot.hpp"

using namespace se3nav;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

fs::path work_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("se3nav_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

/// Runs the CLI with the given argument string inside `dir`.
Result run(const fs::path& dir, const std::string& args) {
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string("\"") + SE3NAV_CLI + "\" " + args + " >\"" +
                          out.string() + "\" 2>\"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

/// Last JSON object printed on stderr.
json stderr_json(const Result& r) {
  const auto pos = r.err.rfind("{\"");
  return pos == std::string::npos ? json() : json::parse(r.err.substr(pos));
}

const std::string kSwap = "two_agent_swap --set sim.t_end=2";

fs::path synthetic_table(const fs::path& dir, std::size_t n, std::uint64_t seed,
                         double lengthscale) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<gp::State> xs(n);
  for (auto& x : xs) {
    for (int c = 0; c < gp::kStateDim; ++c) x(c) = nd(rng);
  }
  const gp::KernelParams truth{1.0, lengthscale, 1e-10};
  const Eigen::MatrixXd L = gp::gram_matrix(xs, truth).llt().matrixL();
  Eigen::MatrixXd Z(static_cast<Eigen::Index>(n), 6);
  for (Eigen::Index r = 0; r < Z.rows(); ++r) {
    for (int c = 0; c < 6; ++c) Z(r, c) = nd(rng);
  }
  const Eigen::MatrixXd F = L * Z;
  std::vector<gp::TrainingPair> pairs;
  for (std::size_t r = 0; r < n; ++r) {
    Vec6 y = F.row(static_cast<Eigen::Index>(r)).transpose();
    for (int c = 0; c < 6; ++c) y(c) += 0.1 * nd(rng);
    pairs.push_back({xs[r], y});
  }
  const fs::path p = dir / "table.csv";
  std::ofstream f(p);
  gp::write_table(f, std::span<const gp::TrainingPair>(pairs));
  return p;
}

}  // namespace

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

TEST(CliSimulate, WritesThreeFiles) {
  const fs::path d = work_dir("sim_files");
  const Result r = run(d, "simulate " + kSwap + " \"" + (d / "out").string() + "\"");
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"episode.csv", "metrics.json", "run-manifest.json"}) {
    EXPECT_TRUE(fs::exists(d / "out" / f)) << f;
  }
  const json m = read_json(d / "out" / "run-manifest.json");
  for (const char* k : {"config_sha256", "episode_sha256", "seed", "version", "tool"}) {
    EXPECT_TRUE(m.contains(k)) << k;
  }
  EXPECT_EQ(m["config_sha256"].get<std::string>().size(), 64u);
  const json metrics = read_json(d / "out" / "metrics.json");
  EXPECT_TRUE(metrics["gp_coverage"].is_null());
  EXPECT_EQ(metrics["agents"].size(), 2u);
}

TEST(CliSimulate, ManifestHashIsReproducibleAcrossThreads) {
  const fs::path d = work_dir("sim_hash");
  const std::string noisy = " --set noise.position_std=0.05 --set noise.attitude_std_deg=0.5";
  ASSERT_EQ(run(d, "simulate " + kSwap + noisy + " \"" + (d / "a").string() + "\"").code, 0);
  ASSERT_EQ(run(d, "--threads 8 simulate " + kSwap + noisy + " \"" + (d / "b").string() + "\"")
                .code,
            0);
  const json a = read_json(d / "a" / "run-manifest.json");
  const json b = read_json(d / "b" / "run-manifest.json");
  EXPECT_EQ(a["episode_sha256"], b["episode_sha256"]);
  EXPECT_EQ(a["config_sha256"], b["config_sha256"]);
  EXPECT_EQ(slurp(d / "a" / "episode.csv"), slurp(d / "b" / "episode.csv"));
}

TEST(CliSimulate, SeedChangesNoiseButNotSchema) {
  const fs::path d = work_dir("sim_seed");
  const std::string noisy = " --set noise.position_std=0.05";
  ASSERT_EQ(run(d, "simulate " + kSwap + noisy + " \"" + (d / "a").string() + "\"").code, 0);
  ASSERT_EQ(run(d, "simulate " + kSwap + noisy + " --set sim.seed=7 \"" + (d / "b").string() +
                       "\"")
                .code,
            0);
  const std::string a = slurp(d / "a" / "episode.csv");
  const std::string b = slurp(d / "b" / "episode.csv");
  EXPECT_NE(a, b);
  EXPECT_EQ(a.substr(0, a.find('\n')), b.substr(0, b.find('\n')));
  EXPECT_EQ(read_json(d / "b" / "run-manifest.json")["seed"].get<std::uint64_t>(), 7u);
}

TEST(CliSimulate, UnknownKeyExitsTwoWithPosition) {
  const fs::path d = work_dir("sim_unknown");
  std::ofstream(d / "bad.cfg") << "[sim]\ndt = 0.001\nt_edn = 3\n";
  const Result r =
      run(d, "simulate \"" + (d / "bad.cfg").string() + "\" \"" + (d / "out").string() + "\"");
  EXPECT_EQ(r.code, 2);
  const json e = read_json(d / "out" / "error.json");
  EXPECT_EQ(e["error"], "parse_error");
  EXPECT_EQ(e["line"], 3);
  EXPECT_EQ(e["column"], 1);
  EXPECT_EQ(stderr_json(r)["exit_code"], 2);
}

TEST(CliSimulate, ValidationFailureListsViolations) {
  const fs::path d = work_dir("sim_invalid");
  const Result r =
      run(d, "simulate " + kSwap + " --set gains.c=1 \"" + (d / "out").string() + "\"");
  EXPECT_EQ(r.code, 2);
  const json e = read_json(d / "out" / "error.json");
  EXPECT_EQ(e["error"], "validation_error");
  ASSERT_TRUE(e["violations"].is_array());
  EXPECT_GE(e["violations"].size(), 1u);
}

TEST(CliSimulate, DivergenceExitsThreeWithTick) {
  const fs::path d = work_dir("sim_diverge");
  const Result r = run(d, "simulate paper_7uav --set sim.dt=1 \"" + (d / "out").string() + "\"");
  EXPECT_EQ(r.code, 3);
  const json e = read_json(d / "out" / "error.json");
  EXPECT_EQ(e["error"], "integration_diverged");
  ASSERT_TRUE(e["tick"].is_number_integer());
  EXPECT_GE(e["tick"].get<long>(), 1);
  EXPECT_FALSE(fs::exists(d / "out" / "episode.csv"));
}

TEST(CliSimulate, MissingFileExitsTwo) {
  const fs::path d = work_dir("sim_missing");
  EXPECT_EQ(run(d, "simulate \"" + (d / "nope.cfg").string() + "\" \"" + (d / "out").string() + "\"").code, 2);
}

TEST(Cli, UsageErrorsExitTwo) {
  const fs::path d = work_dir("usage");
  EXPECT_EQ(run(d, "").code, 2);
  EXPECT_EQ(run(d, "frobnicate").code, 2);
  EXPECT_EQ(run(d, "--threads 0 validate").code, 2);
}

// ---------------------------------------------------------------------------
// train-gp
// ---------------------------------------------------------------------------

TEST(CliTrainGp, RecoversLengthscaleAndIsDeterministic) {
  const fs::path d = work_dir("train");
  const fs::path table = synthetic_table(d, 120, 3, 2.0);
  const std::string a = (d / "a.json").string();
  const std::string b = (d / "b.json").string();
  ASSERT_EQ(run(d, "--seed 5 train-gp \"" + table.string() + "\" \"" + a + "\"").code, 0);
  ASSERT_EQ(run(d, "--seed 5 train-gp \"" + table.string() + "\" \"" + b + "\"").code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  const json j = read_json(a);
  const double ell = j["lengthscale"].get<double>();
  EXPECT_GT(ell, 1.0);
  EXPECT_LT(ell, 4.0);
  EXPECT_TRUE(j["log_marginal_likelihood"].is_number());
  EXPECT_EQ(j["rows"], 120);
}

TEST(CliTrainGp, FewerThanFiveRowsExitsTwo) {
  const fs::path d = work_dir("train_small");
  const fs::path table = synthetic_table(d, 4, 1, 1.0);
  const Result r = run(d, "train-gp \"" + table.string() + "\" \"" + (d / "o.json").string() + "\"");
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(stderr_json(r)["error"], "insufficient_data");
  EXPECT_FALSE(fs::exists(d / "o.json"));
}

TEST(CliTrainGp, MalformedTableReportsRow) {
  const fs::path d = work_dir("train_bad");
  const fs::path table = synthetic_table(d, 8, 2, 1.0);
  std::string text = slurp(table);
  std::size_t pos = 0;
  for (int line = 0; line < 3; ++line) pos = text.find('\n', pos) + 1;
  text.insert(pos, "x");
  std::ofstream(table, std::ios::trunc) << text;
  const Result r = run(d, "train-gp \"" + table.string() + "\" \"" + (d / "o.json").string() + "\"");
  EXPECT_EQ(r.code, 2);
  const json e = stderr_json(r);
  EXPECT_EQ(e["error"], "malformed_table");
  EXPECT_EQ(e["row"], 4);
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

TEST(CliValidate, CleanBuildPasses) {
  const fs::path d = work_dir("validate");
  const Result r = run(d, "validate");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
  EXPECT_NE(r.out.find("duality"), std::string::npos);
}

TEST(CliValidate, AdStarMutationFailsDuality) {
  const fs::path d = work_dir("validate_mut");
  const Result r = run(d, "validate --mutate-ad-star");
  EXPECT_EQ(r.code, 1);
  std::istringstream lines(r.out);
  std::string line;
  bool duality_failed = false;
  while (std::getline(lines, line)) {
    if (line.find("duality") != std::string::npos && line.find("FAIL") != std::string::npos) {
      duality_failed = true;
    }
  }
  EXPECT_TRUE(duality_failed) << r.out;
}

// ---------------------------------------------------------------------------
// plot
// ---------------------------------------------------------------------------

TEST(CliPlot, EpisodeGivesSixFigures) {
  const fs::path d = work_dir("plot");
  ASSERT_EQ(run(d, "simulate " + kSwap + " \"" + (d / "sim").string() + "\"").code, 0);
  const Result r = run(d, "plot \"" + (d / "sim" / "episode.csv").string() + "\" \"" +
                              (d / "fig").string() + "\"");
  ASSERT_EQ(r.code, 0) << r.err;
  for (const auto& name : plot::figure_names()) EXPECT_TRUE(fs::exists(d / "fig" / name)) << name;
}

TEST(CliPlot, EmptyEpisodeExitsTwo) {
  const fs::path d = work_dir("plot_empty");
  ASSERT_EQ(run(d, "simulate " + kSwap + " \"" + (d / "sim").string() + "\"").code, 0);
  const std::string csv = slurp(d / "sim" / "episode.csv");
  std::ofstream(d / "empty.csv") << csv.substr(0, csv.find('\n') + 1);
  const Result r = run(d, "plot \"" + (d / "empty.csv").string() + "\" \"" +
                              (d / "fig").string() + "\"");
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(stderr_json(r)["error"], "empty_episode");
}

TEST(CliPlot, SchemaMismatchNamesColumn) {
  const fs::path d = work_dir("plot_schema");
  std::ofstream(d / "bad.csv") << "tick,t,agent\n0,0,0\n";
  const Result r = run(d, "plot \"" + (d / "bad.csv").string() + "\" \"" +
                              (d / "fig").string() + "\"");
  EXPECT_EQ(r.code, 2);
  const json e = stderr_json(r);
  EXPECT_EQ(e["error"], "schema_mismatch");
  EXPECT_EQ(e["column"], "R00");
}
