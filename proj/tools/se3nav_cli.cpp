// se3nav command-line front end.
//
// Exit codes:
//   0  success
//   1  validate: at least one invariant failed; unexpected internal error
//   2  bad input: unreadable file, parse or validation error, malformed
//      table, empty or schema-mismatched episode
//   3  integration diverged
//   4  degenerate navigation configuration during simulation

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "se3nav/config_io.hpp"
#include "se3nav/episode_io.hpp"
#include "se3nav/gp.hpp"
#include "se3nav/invariant_suite.hpp"
#include "se3nav/metrics.hpp"
#include "se3nav/plot.hpp"
#include "se3nav/sha256.hpp"
#include "se3nav/sim.hpp"

#ifndef SE3NAV_VERSION
#define SE3NAV_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace se3nav;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitBadInput = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitDegenerate = 4;

/// Reports a failure on stderr as JSON and, when a directory is given, in
/// error.json there.
int fail(int code, const std::string& kind, const std::string& message,
         const std::optional<fs::path>& out_dir, json extra = json::object()) {
  json j = {{"error", kind}, {"message", message}, {"exit_code", code}};
  for (auto& [k, v] : extra.items()) j[k] = v;
  std::cerr << j.dump() << '\n';
  if (out_dir) {
    std::error_code ec;
    fs::create_directories(*out_dir, ec);
    std::ofstream(*out_dir / "error.json") << j.dump(2) << '\n';
  }
  return code;
}

struct Globals {
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

int cmd_simulate(const Globals& g, const std::string& cfg_path, const fs::path& out,
                 std::vector<std::string> overrides) {
  if (g.seed) overrides.push_back("sim.seed=" + std::to_string(*g.seed));
  ScenarioConfig cfg;
  try {
    cfg = config::load_config(cfg_path, overrides);
  } catch (const ParseError& e) {
    return fail(kExitBadInput, "parse_error", e.what(), out,
                {{"line", e.line()}, {"column", e.column()}});
  } catch (const ValidationError& e) {
    return fail(kExitBadInput, "validation_error", e.what(), out,
                {{"violations", e.violations()}});
  } catch (const InvalidArgument& e) {
    return fail(kExitBadInput, "invalid_argument", e.what(), out);
  }

  EpisodeLog log;
  try {
    log = run_episode(cfg, RunOptions{g.threads});
  } catch (const IntegrationDiverged& e) {
    return fail(kExitDiverged, "integration_diverged", e.what(), out,
                {{"tick", e.tick()}, {"time", static_cast<double>(e.tick()) * cfg.sim.dt}});
  } catch (const DegenerateConfiguration& e) {
    return fail(kExitDegenerate, "degenerate_configuration", e.what(), out,
                {{"tick", e.tick()}, {"agent", e.agent()}});
  }
  for (const auto& w : log.warnings) std::cerr << "warning: " << w << '\n';

  fs::create_directories(out);
  std::ostringstream csv;
  write_episode_csv(csv, log);
  const std::string csv_text = csv.str();
  std::ofstream(out / "episode.csv", std::ios::binary) << csv_text;

  const MetricsReport metrics = compute_metrics(log, cfg);
  std::ofstream(out / "metrics.json") << to_json(metrics, cfg.sim.dt).dump(2) << '\n';

  const std::string canonical = config::to_string(cfg);
  const json manifest = {{"tool", "se3nav"},
                         {"version", SE3NAV_VERSION},
                         {"scenario", cfg.name},
                         {"seed", cfg.sim.seed},
                         {"config_sha256", sha256_hex(canonical)},
                         {"episode_sha256", sha256_hex(csv_text)},
                         {"overrides", overrides},
                         {"threads", g.threads},
                         {"agents", cfg.agent_count()},
                         {"ticks", log.ticks}};
  std::ofstream(out / "run-manifest.json") << manifest.dump(2) << '\n';
  std::cout << "wrote " << (out / "episode.csv").string() << ", metrics.json, run-manifest.json\n"
            << "min pairwise distance " << metrics.min_distance << " m, waypoints missed "
            << metrics.waypoints_missed << '\n';
  return kExitOk;
}

int cmd_train_gp(const Globals& g, const fs::path& table, const fs::path& out, int budget) {
  std::ifstream f(table);
  if (!f) return fail(kExitBadInput, "io_error", "cannot open " + table.string(), std::nullopt);
  std::vector<gp::TrainingPair> rows;
  try {
    rows = gp::read_table(f);
  } catch (const ParseError& e) {
    return fail(kExitBadInput, "malformed_table", e.what(), std::nullopt,
                {{"row", e.line()}, {"column", e.column()}});
  }
  if (rows.size() < 5) {
    return fail(kExitBadInput, "insufficient_data",
                "at least 5 rows are required, got " + std::to_string(rows.size()),
                std::nullopt, {{"rows", rows.size()}});
  }
  gp::Dataset data(rows.size());
  for (const auto& r : rows) data.update(r, 0.0, 1.0);
  const std::uint64_t seed = g.seed.value_or(1);
  const gp::FitResult fit = gp::fit_hyperparameters(data, gp::KernelParams{}, budget, seed);
  const json j = {{"signal_variance", fit.params.signal_variance},
                  {"lengthscale", fit.params.lengthscale},
                  {"noise_variance", fit.params.noise_variance},
                  {"log_marginal_likelihood", fit.log_likelihood},
                  {"evaluations", fit.evaluations},
                  {"rows", rows.size()},
                  {"seed", seed}};
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  std::ofstream(out) << j.dump(2) << '\n';
  std::cout << j.dump() << '\n';
  return kExitOk;
}

int cmd_validate(const Globals& g, bool mutate) {
  const auto results =
      validation::run_suite({mutate, g.seed.value_or(1)});
  validation::print_table(std::cout, results);
  for (const auto& r : results) {
    if (!r.pass) return kExitFailed;
  }
  return kExitOk;
}

int cmd_plot(const fs::path& csv_path, const fs::path& out) {
  std::ifstream f(csv_path);
  if (!f) return fail(kExitBadInput, "io_error", "cannot open " + csv_path.string(), std::nullopt);
  CsvTable t;
  try {
    t = read_csv(f);
  } catch (const ParseError& e) {
    return fail(kExitBadInput, "malformed_csv", e.what(), std::nullopt,
                {{"line", e.line()}, {"column", e.column()}});
  }
  const std::string missing = missing_episode_column(t);
  if (!missing.empty()) {
    return fail(kExitBadInput, "schema_mismatch", "missing column '" + missing + "'",
                std::nullopt, {{"column", missing}});
  }
  if (t.rows.empty()) {
    return fail(kExitBadInput, "empty_episode", "episode contains no ticks", std::nullopt);
  }
  for (const auto& p : plot::plot_episode(t, out)) std::cout << p.string() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-agent SE(3) navigation with learned disturbance compensation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SE3NAV_VERSION);
  Globals g;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "root seed (overrides sim.seed)");
  app.add_option("--threads", g.threads, "worker threads per episode")
      ->check(CLI::Range(1, 256));

  std::string cfg_path, out_dir, table, csv;
  std::vector<std::string> overrides;
  int budget = 400;
  bool mutate = false;

  auto* sim = app.add_subcommand("simulate", "run one episode");
  sim->add_option("config", cfg_path, "config file or preset name")->required();
  sim->add_option("out", out_dir, "output directory")->required();
  sim->add_option("--set", overrides, "override section.key=value")->allow_extra_args(false);

  auto* train = app.add_subcommand("train-gp", "fit kernel hyperparameters to a dataset table");
  train->add_option("table", table, "18-column dataset table")->required();
  train->add_option("out", out_dir, "output JSON path")->required();
  train->add_option("--budget", budget, "likelihood evaluations")->check(CLI::PositiveNumber);

  auto* val = app.add_subcommand("validate", "run the embedded invariant suite");
  val->add_flag("--mutate-ad-star", mutate, "negate ad* in the duality check");

  auto* plt = app.add_subcommand("plot", "render SVG figures from an episode CSV");
  plt->add_option("csv", csv, "episode.csv")->required();
  plt->add_option("out", out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitBadInput;
  }
  if (seed_opt->count() > 0) g.seed = seed;

  try {
    if (*sim) return cmd_simulate(g, cfg_path, out_dir, overrides);
    if (*train) return cmd_train_gp(g, table, out_dir, budget);
    if (*val) return cmd_validate(g, mutate);
    if (*plt) return cmd_plot(csv, out_dir);
  } catch (const InsufficientData& e) {
    return fail(kExitBadInput, "insufficient_data", e.what(), std::nullopt);
  } catch (const std::exception& e) {
    return fail(kExitFailed, "internal_error", e.what(), std::nullopt);
  }
  return kExitFailed;
}
