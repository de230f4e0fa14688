#include <sys/stat.h>

#include <cstdlib>
#include <fstream>
#include <regex>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "gamm/error.hpp"
#include "gamm/experiment.hpp"
#include "gamm/graph_io.hpp"
#include "gamm/mask.hpp"
#include "test_util.hpp"

using namespace gamm;
using nlohmann::json;
using test::read_file;
using test::TempDir;
using test::write_file;

namespace {

SynthSpec small_synth(std::uint64_t seed = 11) {
  SynthSpec s;
  s.num_nodes = 120;
  s.num_blocks = 2;
  s.p_in = 0.12;
  s.p_out = 0.02;
  s.mu_gap = 1.0;
  s.num_features = 3;
  s.noise_sd = 0.4;
  s.seed = seed;
  s.name = "mini";
  return s;
}

ExperimentConfig small_config(const std::filesystem::path& out) {
  ExperimentConfig cfg;
  DatasetRef ds;
  ds.synth = small_synth();
  cfg.datasets = {ds};
  MechanismConfig mcar;
  mcar.kind = MechanismKind::MCAR;
  cfg.mechanisms = {mcar};
  cfg.p_miss = {0.3};
  cfg.imputers = {"tabular_mean"};
  cfg.repetitions = 2;
  cfg.master_seed = 99;
  cfg.output_dir = out.string();
  return cfg;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(GAMM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string run_cli_capture(const std::string& args) {
  TempDir tmp;
  const auto out_path = tmp / "stdout.txt";
  const std::string cmd =
      std::string(GAMM_CLI_PATH) + " " + args + " > " + out_path.string() + " 2>/dev/null";
  if (std::system(cmd.c_str()) != 0) return "";
  return read_file(out_path);
}

}  // namespace

TEST_CASE("smallest sweep produces the expected grid") {
  TempDir dir;
  auto cfg = small_config(dir / "out");
  auto result = run_experiment(cfg);
  CHECK(result.tuples_total == 2);
  CHECK(result.tuples_failed == 0);

  json report = json::parse(read_file(result.report_path));
  CHECK(report.at("samples").size() == 2);
  CHECK(report.at("grid").at("tuples").get<int>() == 2);
  for (const auto& s : report.at("samples")) {
    CHECK(s.at("mae").get<double>() > 0.0);
    CHECK(s.at("rmse").get<double>() >= s.at("mae").get<double>());
  }
  json manifest = json::parse(read_file(dir / "out" / "manifest.json"));
  CHECK(manifest.at("tuple_count").get<int>() == 2);
  CHECK(manifest.at("tuples").size() == 2);
}

TEST_CASE("identical config and seed reproduce the report byte for byte") {
  TempDir dir;
  auto cfg1 = small_config(dir / "o1");
  cfg1.emit_masks = true;
  auto cfg2 = small_config(dir / "o2");
  cfg2.emit_masks = true;
  auto r1 = run_experiment(cfg1);
  auto r2 = run_experiment(cfg2);

  auto strip_outdir = [](std::string text) {
    // The config echo embeds the output directory; normalize it away.
    return std::regex_replace(text, std::regex("\"output_dir\": \"[^\"]*\""),
                              "\"output_dir\": \"X\"");
  };
  CHECK(strip_outdir(read_file(r1.report_path)) == strip_outdir(read_file(r2.report_path)));

  for (const auto& entry : std::filesystem::directory_iterator(dir / "o1" / "masks")) {
    const auto name = entry.path().filename();
    CHECK(read_file(entry.path()) == read_file(dir / "o2" / "masks" / name));
  }
}

TEST_CASE("deleting the report and rerunning only reassembles it") {
  TempDir dir;
  auto cfg = small_config(dir / "out");
  auto first = run_experiment(cfg);
  const std::string before = read_file(first.report_path);
  const auto tuple_dir = dir / "out" / "tuples";
  auto mtime = std::filesystem::last_write_time(
      *std::filesystem::directory_iterator(tuple_dir));

  std::filesystem::remove(first.report_path);
  auto second = rebuild_report(dir / "out");
  CHECK(read_file(second.report_path) == before);
  // Tuple files were reused, not recomputed.
  CHECK(std::filesystem::last_write_time(*std::filesystem::directory_iterator(tuple_dir)) ==
        mtime);

  // A full rerun with the same config also reuses them.
  auto third = run_experiment(cfg);
  CHECK(read_file(third.report_path) == before);
}

TEST_CASE("config validation failures abort before any work") {
  TempDir dir;
  auto cfg = small_config(dir / "out");
  SUBCASE("bad rate") {
    cfg.p_miss = {1.5};
    CHECK_THROWS_AS(run_experiment(cfg), ConfigError);
  }
  SUBCASE("no datasets") {
    cfg.datasets.clear();
    CHECK_THROWS_AS(run_experiment(cfg), ConfigError);
  }
  SUBCASE("unknown imputer") {
    cfg.imputers = {"magic"};
    CHECK_THROWS_AS(run_experiment(cfg), ConfigError);
  }
  SUBCASE("missing plugin path") {
    cfg.imputers = {"external:/does/not/exist"};
    CHECK_THROWS_AS(run_experiment(cfg), ConfigError);
  }
  SUBCASE("zero repetitions") {
    cfg.repetitions = 0;
    CHECK_THROWS_AS(run_experiment(cfg), ConfigError);
  }
  CHECK(!std::filesystem::exists(dir / "out" / "manifest.json"));
}

TEST_CASE("config JSON round-trip keeps every field") {
  TempDir dir;
  auto cfg = small_config(dir / "out");
  cfg.jobs = 3;
  cfg.observed_columns = {0};
  cfg.density_features = {1, 2};
  cfg.comparisons = {{"MCAR", "MCAR"}};
  cfg.imputer_config.max_iters = 17;
  auto back = ExperimentConfig::from_json_string(cfg.to_json_string());
  CHECK(back.jobs == 3);
  CHECK(back.observed_columns == std::vector<int>{0});
  CHECK(back.density_features == std::vector<int>{1, 2});
  CHECK(back.imputer_config.max_iters == 17);
  CHECK(back.datasets.size() == 1);
  CHECK(back.datasets[0].synth.has_value());
  CHECK(back.repetitions == 2);
  CHECK_THROWS_AS(ExperimentConfig::from_json_string(R"({"dataset": []})"), ConfigError);

  SUBCASE("comparisons must reference configured mechanisms") {
    cfg.comparisons = {{"A-MNAR", "N-MNAR"}};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);  // only MCAR is configured
  }
}

TEST_CASE("per-tuple failures are recorded and the run continues") {
  TempDir dir;
  auto plugin = dir / "bad.sh";
  write_file(plugin, "#!/bin/sh\nexit 9\n");
  chmod(plugin.string().c_str(), 0755);

  auto cfg = small_config(dir / "out");
  cfg.imputers = {"external:" + plugin.string()};
  auto result = run_experiment(cfg);
  CHECK(result.tuples_failed == result.tuples_total);
  json report = json::parse(read_file(result.report_path));
  CHECK(report.at("failures").size() == 2);
  CHECK(report.at("samples").empty());
}

TEST_CASE("parallel execution matches single-threaded output") {
  TempDir dir;
  auto cfg1 = small_config(dir / "seq");
  cfg1.mechanisms.push_back([] {
    MechanismConfig m;
    m.kind = MechanismKind::A_MNAR;
    return m;
  }());
  cfg1.repetitions = 3;
  auto cfg4 = cfg1;
  cfg4.output_dir = (dir / "par").string();
  cfg4.jobs = 4;
  auto r1 = run_experiment(cfg1);
  auto r4 = run_experiment(cfg4);
  auto strip = [](std::string text) {
    text = std::regex_replace(text, std::regex("\"output_dir\": \"[^\"]*\""), "");
    return std::regex_replace(text, std::regex("\"jobs\": \\d+"), "");
  };
  CHECK(strip(read_file(r1.report_path)) == strip(read_file(r4.report_path)));
}

TEST_CASE("cli: mask -> impute -> eval composes to the sweep's numbers") {
  TempDir dir;
  auto cfg = small_config(dir / "out");
  MechanismConfig mech;
  mech.kind = MechanismKind::A_MNAR;
  cfg.mechanisms = {mech};
  cfg.imputers = {"feature_propagation"};
  auto result = run_experiment(cfg);
  REQUIRE(result.tuples_failed == 0);

  json report = json::parse(read_file(result.report_path));
  json manifest = json::parse(read_file(dir / "out" / "manifest.json"));
  const auto& sample = report.at("samples").at(0);
  const auto seed = manifest.at("tuples").at(0).at("seed").get<std::uint64_t>();

  // Reproduce the same tuple through the CLI surface.
  auto g = generate_sbm(small_synth());
  save_graph(g, dir / "ds");
  const std::string ds = (dir / "ds").string();
  REQUIRE(run_cli("mask " + ds + " --mechanism A-MNAR --p-miss 0.3 --seed " +
                  std::to_string(seed) + " --out " + (dir / "m.gamm").string()) == 0);
  REQUIRE(run_cli("impute " + ds + " --mask " + (dir / "m.gamm").string() +
                  " --imputer feature_propagation --out " + (dir / "imp.csv").string()) == 0);
  auto eval_out = run_cli_capture("eval " + ds + " --mask " + (dir / "m.gamm").string() +
                                  " --imputed " + (dir / "imp.csv").string() + " --json " +
                                  (dir / "metrics.json").string());
  CHECK(eval_out.find("mae=") == 0);
  json metrics = json::parse(read_file(dir / "metrics.json"));
  CHECK(metrics.at("mae").get<double>() == sample.at("mae").get<double>());
  CHECK(metrics.at("rmse").get<double>() == sample.at("rmse").get<double>());
}

TEST_CASE("cli: exit codes follow the documented contract") {
  TempDir dir;
  CHECK(run_cli("mask /nonexistent --mechanism MCAR --p-miss 0.5") == 3);   // dataset error
  CHECK(run_cli("nonsense-subcommand") == 2);                               // usage
  write_file(dir / "cfg.json", R"({"datasets": [], "mechanisms": []})");
  CHECK(run_cli("run --config " + (dir / "cfg.json").string()) == 2);       // config error

  auto g = generate_sbm(small_synth());
  save_graph(g, dir / "ds");
  CHECK(run_cli("mask " + (dir / "ds").string() + " --mechanism S-MNAR --p-miss 0.5") == 2);
  CHECK(run_cli("mask " + (dir / "ds").string() +
                " --mechanism MCAR --p-miss 0.5 --out " + (dir / "m.gamm").string()) == 0);

  // Partial failure in a sweep exits with 4 but still writes the report.
  auto plugin = dir / "bad.sh";
  write_file(plugin, "#!/bin/sh\nexit 1\n");
  chmod(plugin.string().c_str(), 0755);
  auto cfg = small_config(dir / "out4");
  cfg.imputers = {"external:" + plugin.string()};
  write_file(dir / "cfg4.json", cfg.to_json_string(2));
  CHECK(run_cli("run --config " + (dir / "cfg4.json").string()) == 4);
  CHECK(std::filesystem::exists(dir / "out4" / "report.json"));
}

TEST_CASE("density exports pool repetitions onto a shared grid") {
  TempDir dir;
  auto cfg = small_config(dir / "out");
  MechanismConfig mech;
  mech.kind = MechanismKind::N_MNAR;
  cfg.mechanisms = {mech};
  cfg.imputers = {"tabular_mean", "graph_average"};
  cfg.repetitions = 3;
  cfg.density_features = {0, 2};
  cfg.density_grid = 64;
  auto result = run_experiment(cfg);
  REQUIRE(result.tuples_failed == 0);

  for (int col : {0, 2}) {
    const auto path = dir / "out" / "density" / "mini" / "N-MNAR" / (std::to_string(col) + ".csv");
    REQUIRE(std::filesystem::exists(path));
    auto text = read_file(path);
    CHECK(text.rfind("x,truth_density,tabular_mean,graph_average\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 65);  // header + grid rows
  }

  SUBCASE("out-of-range density column aborts before any work") {
    auto bad = small_config(dir / "bad");
    bad.density_features = {9};
    CHECK_THROWS_AS(run_experiment(bad), ConfigError);
    CHECK(!std::filesystem::exists(dir / "bad" / "manifest.json"));
  }
}

TEST_CASE("cli: masks are byte-identical across runs with one seed") {
  TempDir dir;
  auto g = generate_sbm(small_synth());
  save_graph(g, dir / "ds");
  const std::string ds = (dir / "ds").string();
  REQUIRE(run_cli("mask " + ds + " --mechanism N-MNAR --p-miss 0.4 --seed 5 --out " +
                  (dir / "a.gamm").string()) == 0);
  REQUIRE(run_cli("mask " + ds + " --mechanism N-MNAR --p-miss 0.4 --seed 5 --out " +
                  (dir / "b.gamm").string()) == 0);
  CHECK(read_file(dir / "a.gamm") == read_file(dir / "b.gamm"));
}
