#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gamm {

/// One (dataset, mechanism, rate, imputer, repetition) measurement.
struct MetricSample {
  std::string dataset;
  std::string mechanism;
  double p_miss = 0.0;
  std::string imputer;
  int repetition = 0;
  std::uint64_t seed = 0;
  double mae = 0.0;
  double rmse = 0.0;
};

enum class Direction { degradation, no_change, improvement };

const char* to_string(Direction d);

/// One (imputer, dataset) comparison between a reference mechanism and a new
/// mechanism at a fixed rate. degradation_pct follows the
/// 100*(ref-new)/ref convention: negative means the new mechanism made the
/// error worse.
struct ComparisonCell {
  std::string imputer;
  std::string dataset;
  std::string mech_ref;
  std::string mech_new;
  double p_miss = 0.0;
  double degradation_pct = 0.0;
  double u_statistic = 0.0;
  double p_value = 1.0;
  bool significant = false;  // p_value < 0.05
  Direction direction = Direction::no_change;
};

struct OutcomeSummary {
  std::string family;
  int degradation = 0;
  int no_change = 0;
  int improvement = 0;

  int total() const { return degradation + no_change + improvement; }
  double pct(int count) const {
    return total() == 0 ? 0.0 : 100.0 * static_cast<double>(count) / static_cast<double>(total());
  }
};

struct ComparisonTable {
  std::string mech_ref;
  std::string mech_new;
  double p_miss = 0.0;
  std::vector<ComparisonCell> cells;           // sorted by (imputer, dataset)
  OutcomeSummary summary;
  std::vector<std::string> missing_cells;      // cells lacking >= 2 reps per side
};

/// Builds the per-(imputer, dataset) comparison of mech_ref vs mech_new at
/// rate p_miss. The degradation % compares mean MAE across repetitions; the
/// U test runs on the full repetition samples. Cells with fewer than two
/// repetitions on either side are reported in missing_cells, never invented.
ComparisonTable build_comparison_table(std::span<const MetricSample> samples,
                                       const std::string& mech_ref,
                                       const std::string& mech_new, double p_miss);

/// Aggregates several tables (e.g. all rates of one mechanism pair, or
/// everything) into one outcome bookkeeping row.
OutcomeSummary summarize(const std::vector<ComparisonTable>& tables, std::string family);

}  // namespace gamm
