#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gamm/imputers.hpp"
#include "gamm/mechanism.hpp"
#include "gamm/synth.hpp"

namespace gamm {

/// A dataset is either a directory on disk or a synthetic spec generated on
/// the fly; both end up in the same loader path.
struct DatasetRef {
  std::string path;                 // empty when synthetic
  std::optional<SynthSpec> synth;
  std::string name;                 // display name; defaulted when empty

  std::string display_name() const;
};

/// Per-mechanism overrides on top of the experiment-level defaults.
struct MechanismConfig {
  MechanismKind kind = MechanismKind::MCAR;
  std::optional<double> omega;
  std::optional<Sign> sign;
  std::optional<int> hops;
  std::optional<GWeights> g_weights;
  std::optional<std::vector<int>> observed_columns;
  std::optional<int> a_mar_column;
};

struct ExperimentConfig {
  std::vector<DatasetRef> datasets;
  std::vector<MechanismConfig> mechanisms;
  std::vector<double> p_miss{0.2, 0.5, 0.8};
  std::vector<std::string> imputers{"tabular_mean", "graph_average", "feature_propagation"};
  int repetitions = 8;
  std::uint64_t master_seed = 0;
  std::string output_dir = "gamm-out";
  int jobs = 1;
  std::vector<int> observed_columns;  // default column split for every mechanism
  // Comparison families as (reference, new) mechanism names. Empty selects
  // the default pairs A-MAR vs N-MAR and A-MNAR vs N-MNAR where configured.
  std::vector<std::pair<std::string, std::string>> comparisons;
  ImputerConfig imputer_config;
  std::vector<int> density_features;  // columns exported as KDE CSVs (at the first rate)
  std::size_t density_grid = 512;
  bool emit_masks = false;

  void validate() const;
  std::vector<std::pair<std::string, std::string>> resolved_comparisons() const;
  std::string to_json_string(int indent = -1) const;
  static ExperimentConfig from_json_string(const std::string& json_text);
  static ExperimentConfig load(const std::filesystem::path& path);
};

struct RunResult {
  int tuples_total = 0;
  int tuples_failed = 0;
  std::filesystem::path report_path;
};

/// Full sweep: every (dataset, mechanism, rate, repetition) tuple generates
/// a mask, runs every imputer, and lands in its own JSON file under
/// <output_dir>/tuples/ (crash-resumable: existing tuple files with the
/// right seed are reused). The manifest records every derived seed; the
/// final report.json, tables/*.csv and density/ exports are assembled from
/// the tuple files. Per-tuple failures are recorded and skipped.
RunResult run_experiment(const ExperimentConfig& config);

/// Re-assembles report.json and the table/density exports from an existing
/// output directory (manifest + tuple files) without recomputing tuples.
RunResult rebuild_report(const std::filesystem::path& output_dir);

}  // namespace gamm
