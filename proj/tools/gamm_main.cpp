// Command-line front end for the GAMM missingness benchmark harness.
//
// Subcommands: synth (generate a dataset), mask (instantiate one mechanism),
// impute (run one imputer over a dataset+mask), eval (score an imputed
// matrix), run (full sweep from a JSON config), report (rebuild outputs from
// stored per-tuple results).
//
// Exit codes: 0 success, 2 config/usage error, 3 dataset error, 4 a sweep
// finished with recorded per-tuple failures, 1 other errors.

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"

#include "gamm/error.hpp"
#include "gamm/experiment.hpp"
#include "gamm/graph_io.hpp"
#include "gamm/imputers.hpp"
#include "gamm/logging.hpp"
#include "gamm/mechanism.hpp"
#include "gamm/metrics.hpp"
#include "gamm/synth.hpp"
#include "gamm/text.hpp"

namespace {

struct CliState {
  int exit_code = 0;
};

void add_synth(CLI::App& app) {
  auto* cmd = app.add_subcommand("synth", "Generate a synthetic SBM dataset directory");
  auto spec = std::make_shared<gamm::SynthSpec>();
  auto out = std::make_shared<std::string>();
  cmd->add_option("--nodes", spec->num_nodes, "Number of nodes")->required();
  cmd->add_option("--blocks", spec->num_blocks, "Number of blocks/classes");
  cmd->add_option("--p-in", spec->p_in, "Within-block edge probability");
  cmd->add_option("--p-out", spec->p_out, "Between-block edge probability");
  cmd->add_option("--mu-gap", spec->mu_gap, "Class prototype spread per column");
  cmd->add_option("--features", spec->num_features, "Number of feature columns");
  cmd->add_option("--noise-sd", spec->noise_sd, "Feature noise standard deviation");
  cmd->add_option("--seed", spec->seed, "Generator seed");
  cmd->add_option("--name", spec->name, "Dataset name");
  cmd->add_option("--out", *out, "Output dataset directory")->required();
  cmd->callback([spec, out] {
    auto g = gamm::generate_sbm(*spec);
    gamm::save_graph(g, *out);
    std::printf("wrote %s: n=%zu edges=%zu d=%zu classes=%d\n", out->c_str(), g.num_nodes(),
                g.num_edges(), g.num_features(), g.num_classes());
  });
}

void add_mask(CLI::App& app) {
  auto* cmd = app.add_subcommand("mask", "Generate a missingness mask for a dataset");
  struct Args {
    std::string dataset;
    std::string mechanism;
    double p_miss = 0.5;
    std::uint64_t seed = 0;
    double omega = 3.0;
    bool omega_set = false;
    std::string sign;
    int hops = 1;
    std::vector<int> observed;
    int a_mar_column = -1;
    std::vector<double> g_weights;
    std::string out = "mask.gamm";
    std::string format = "bin";
  };
  auto args = std::make_shared<Args>();
  cmd->add_option("dataset", args->dataset, "Dataset directory")->required();
  cmd->add_option("--mechanism", args->mechanism, "Mechanism kind (e.g. MCAR, A-MNAR, N-MAR)")
      ->required();
  cmd->add_option("--p-miss", args->p_miss, "Target missing rate in (0,1)")->required();
  cmd->add_option("--seed", args->seed, "Mask seed");
  cmd->add_option("--omega", args->omega, "Dependence strength (default 3.0)");
  cmd->add_option("--sign", args->sign, "positive or negative (default per mechanism)");
  cmd->add_option("--hops", args->hops, "Neighborhood radius for N-/G- mechanisms");
  cmd->add_option("--observed-cols", args->observed, "Always-observed column indices")
      ->delimiter(',');
  cmd->add_option("--a-mar-column", args->a_mar_column,
                  "Use a single observed column as the A-MAR driver");
  cmd->add_option("--g-weights", args->g_weights, "G- mechanism weights w_attr,w_struct,w_neigh")
      ->delimiter(',')
      ->expected(3);
  cmd->add_option("--out", args->out, "Output mask path");
  cmd->add_option("--format", args->format, "bin (default) or csv")
      ->check(CLI::IsMember({"bin", "csv"}));
  cmd->callback([args] {
    auto g = gamm::load_graph(args->dataset);
    gamm::MechanismSpec spec;
    spec.kind = gamm::mechanism_kind_from_string(args->mechanism);
    spec.p_miss = args->p_miss;
    spec.seed = args->seed;
    spec.omega = args->omega;
    spec.hops = args->hops;
    if (!args->sign.empty()) {
      if (args->sign != "positive" && args->sign != "negative") {
        throw gamm::ConfigError("--sign must be positive or negative");
      }
      spec.sign = args->sign == "positive" ? gamm::Sign::positive : gamm::Sign::negative;
    }
    spec.column_split.observed_columns = gamm::normalize_columns(args->observed);
    if (args->a_mar_column >= 0) spec.a_mar_column = args->a_mar_column;
    if (!args->g_weights.empty()) {
      spec.g_weights =
          gamm::GWeights{args->g_weights[0], args->g_weights[1], args->g_weights[2]};
    }
    auto mask = gamm::generate_mask(g, spec);
    gamm::write_mask(mask, args->out,
                     args->format == "csv" ? gamm::MaskFormat::csv : gamm::MaskFormat::binary);
    double achieved = spec.p_miss;
    try {
      achieved = nlohmann::json::parse(mask.provenance)
                     .at("calibration")
                     .at("achieved_expected_rate")
                     .get<double>();
    } catch (const nlohmann::json::exception&) {
    }
    std::printf("wrote %s: target=%s calibrated=%s empirical=%s missing=%zu/%zu\n",
                args->out.c_str(), gamm::format_double(spec.p_miss).c_str(),
                gamm::format_double(achieved).c_str(),
                gamm::format_double(gamm::empirical_rate(mask)).c_str(), mask.missing_count(),
                mask.missable_count());
  });
}

void add_impute(CLI::App& app) {
  auto* cmd = app.add_subcommand("impute", "Impute a dataset under a mask");
  struct Args {
    std::string dataset;
    std::string mask;
    std::string imputer = "feature_propagation";
    std::string out = "imputed.csv";
    int max_iters = 40;
    double tol = 1e-6;
    double timeout = 600.0;
  };
  auto args = std::make_shared<Args>();
  cmd->add_option("dataset", args->dataset, "Dataset directory")->required();
  cmd->add_option("--mask", args->mask, "Mask file (GAMM binary)")->required();
  cmd->add_option("--imputer", args->imputer,
                  "tabular_mean | graph_average | feature_propagation | external:<path>");
  cmd->add_option("--out", args->out, "Output CSV path");
  cmd->add_option("--max-iters", args->max_iters, "Feature propagation iteration cap");
  cmd->add_option("--tol", args->tol, "Feature propagation convergence tolerance");
  cmd->add_option("--timeout", args->timeout, "External plugin timeout in seconds");
  cmd->callback([args] {
    auto g = gamm::load_graph(args->dataset);
    auto mask = gamm::read_mask(args->mask);
    if (mask.rows() != g.num_nodes() || mask.cols() != g.num_features()) {
      throw gamm::DataError("mask shape does not match the dataset");
    }
    gamm::ImputerConfig cfg;
    cfg.max_iters = args->max_iters;
    cfg.convergence_tol = args->tol;
    cfg.plugin_timeout_sec = args->timeout;

    gamm::ImputationResult res;
    if (args->imputer == "tabular_mean") {
      res = gamm::impute_tabular_mean(g.features(), mask);
    } else if (args->imputer == "graph_average") {
      res = gamm::impute_graph_average(g, g.features(), mask);
    } else if (args->imputer == "feature_propagation") {
      res = gamm::impute_feature_propagation(g, g.features(), mask, cfg);
    } else if (args->imputer.rfind("external:", 0) == 0) {
      res = gamm::run_external_imputer(args->imputer.substr(9), g, g.features(), mask, cfg);
    } else {
      throw gamm::ConfigError("unknown imputer \"" + args->imputer + "\"");
    }
    gamm::write_matrix_csv(res.imputed, args->out);
    std::printf("wrote %s: method=%s iterations=%d\n", args->out.c_str(), res.method.c_str(),
                res.iterations);
  });
}

void add_eval(CLI::App& app) {
  auto* cmd = app.add_subcommand("eval", "Score an imputed matrix against the truth");
  struct Args {
    std::string dataset;
    std::string mask;
    std::string imputed;
    std::string json_out;
  };
  auto args = std::make_shared<Args>();
  cmd->add_option("dataset", args->dataset, "Dataset directory (ground truth)")->required();
  cmd->add_option("--mask", args->mask, "Mask file (GAMM binary)")->required();
  cmd->add_option("--imputed", args->imputed, "Imputed matrix CSV")->required();
  cmd->add_option("--json", args->json_out, "Also write metrics as JSON");
  cmd->callback([args] {
    auto g = gamm::load_graph(args->dataset);
    auto mask = gamm::read_mask(args->mask);
    auto imputed = gamm::read_matrix_csv(args->imputed);
    auto metrics = gamm::masked_mae_rmse(g.features(), imputed, mask);
    std::printf("mae=%s rmse=%s missing_entries=%zu\n",
                gamm::format_double(metrics.mae).c_str(),
                gamm::format_double(metrics.rmse).c_str(), metrics.missing_entries);
    if (!args->json_out.empty()) {
      std::string text = "{\n  \"mae\": " + gamm::format_double(metrics.mae) +
                         ",\n  \"rmse\": " + gamm::format_double(metrics.rmse) +
                         ",\n  \"missing_entries\": " + std::to_string(metrics.missing_entries) +
                         "\n}\n";
      std::ofstream out(args->json_out);
      out << text;
    }
  });
}

void add_run(CLI::App& app, CliState& state) {
  auto* cmd = app.add_subcommand("run", "Run a full experiment sweep from a JSON config");
  struct Args {
    std::string config;
    std::vector<double> p_miss;
    int reps = -1;
    std::int64_t seed = -1;
    std::string out;
    int jobs = 0;
    std::vector<std::string> imputers;
    std::vector<std::string> mechanisms;
  };
  auto args = std::make_shared<Args>();
  cmd->add_option("--config", args->config, "Experiment config JSON")->required();
  cmd->add_option("--p-miss", args->p_miss, "Override the rate list")->delimiter(',');
  cmd->add_option("--reps", args->reps, "Override repetitions");
  cmd->add_option("--seed", args->seed, "Override the master seed");
  cmd->add_option("--out", args->out, "Override the output directory");
  cmd->add_option("--jobs", args->jobs, "Override worker count");
  cmd->add_option("--imputer", args->imputers, "Override the imputer list (repeatable)");
  cmd->add_option("--mechanism", args->mechanisms, "Override the mechanism list (repeatable)");
  cmd->callback([args, &state] {
    auto cfg = gamm::ExperimentConfig::load(args->config);
    if (!args->p_miss.empty()) cfg.p_miss = args->p_miss;
    if (args->reps > 0) cfg.repetitions = args->reps;
    if (args->seed >= 0) cfg.master_seed = static_cast<std::uint64_t>(args->seed);
    if (!args->out.empty()) cfg.output_dir = args->out;
    if (args->jobs > 0) cfg.jobs = args->jobs;
    if (!args->imputers.empty()) cfg.imputers = args->imputers;
    if (!args->mechanisms.empty()) {
      cfg.mechanisms.clear();
      for (const auto& name : args->mechanisms) {
        gamm::MechanismConfig m;
        m.kind = gamm::mechanism_kind_from_string(name);
        cfg.mechanisms.push_back(m);
      }
      cfg.comparisons.clear();
    }
    auto result = gamm::run_experiment(cfg);
    std::printf("%d/%d tuples ok; report at %s\n", result.tuples_total - result.tuples_failed,
                result.tuples_total, result.report_path.string().c_str());
    if (result.tuples_failed > 0) {
      std::fprintf(stderr, "gamm: %d tuple(s) failed; see report failures\n",
                   result.tuples_failed);
      state.exit_code = 4;
    }
  });
}

void add_report(CLI::App& app, CliState& state) {
  auto* cmd = app.add_subcommand("report", "Rebuild report outputs from stored tuple results");
  auto out = std::make_shared<std::string>();
  cmd->add_option("--out", *out, "Experiment output directory")->required();
  cmd->callback([out, &state] {
    auto result = gamm::rebuild_report(*out);
    std::printf("%d/%d tuples ok; report at %s\n", result.tuples_total - result.tuples_failed,
                result.tuples_total, result.report_path.string().c_str());
    if (result.tuples_failed > 0) state.exit_code = 4;
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GAMM graph-aware missingness benchmark harness"};
  app.require_subcommand(1);
  CliState state;

  add_synth(app);
  add_mask(app);
  add_impute(app);
  add_eval(app);
  add_run(app, state);
  add_report(app, state);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const gamm::ConfigError& e) {
    std::fprintf(stderr, "gamm: config error: %s\n", e.what());
    return 2;
  } catch (const gamm::DataError& e) {
    std::fprintf(stderr, "gamm: dataset error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "gamm: %s\n", e.what());
    return 1;
  }
  return state.exit_code;
}
