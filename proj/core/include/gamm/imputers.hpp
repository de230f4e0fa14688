#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gamm/graph.hpp"
#include "gamm/mask.hpp"
#include "gamm/matrix.hpp"

namespace gamm {

struct ImputerConfig {
  int max_iters = 40;             // feature propagation cap
  double convergence_tol = 1e-6;  // max-abs change stopping rule
  double plugin_timeout_sec = 600.0;
  void validate() const;
};

struct ImputationResult {
  Matrix imputed;
  std::string method;
  int iterations = 0;
  double wall_ms = 0.0;
  // Fallback diagnostics. zero_filled_columns lists columns with no observed
  // entry anywhere (filled with 0.0); neighbor_fallbacks counts graph-average
  // entries that fell back to the column mean; unreached_entries counts
  // missing entries no propagation path could touch.
  std::vector<int> zero_filled_columns;
  std::uint64_t neighbor_fallbacks = 0;
  std::uint64_t unreached_entries = 0;
};

/// Missing entries of column j become the mean of the column's observed
/// entries; fully-missing columns become 0.0 and are flagged.
ImputationResult impute_tabular_mean(const Matrix& features, const Mask& mask);

/// Missing entry (i, j) becomes the mean of F_kj over 1-hop neighbors k
/// observed in column j, falling back to the column's observed mean, then
/// to 0.0 for fully-missing columns.
ImputationResult impute_graph_average(const AttributedGraph& g, const Matrix& features,
                                      const Mask& mask);

/// Iterative diffusion X <- D^{-1/2} A D^{-1/2} X with observed entries reset
/// to their true values after every sweep and isolated nodes left unchanged.
/// Stops when the max-abs change drops to convergence_tol or at max_iters.
ImputationResult impute_feature_propagation(const AttributedGraph& g, const Matrix& features,
                                            const Mask& mask,
                                            const ImputerConfig& config = {});

/// Runs an external imputer over a file exchange directory. The command is
/// invoked as `<command> <dir>` where the directory holds edges.tsv,
/// features.csv (missing entries zero-filled), mask.csv and spec.json; the
/// plugin must write imputed.csv and exit 0. Altering an observed entry is a
/// hard error, as are timeouts, nonzero exits, and malformed output.
ImputationResult run_external_imputer(const std::string& command, const AttributedGraph& g,
                                      const Matrix& features, const Mask& mask,
                                      const ImputerConfig& config = {});

}  // namespace gamm
