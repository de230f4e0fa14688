#include "gamm/report.hpp"

#include <algorithm>
#include <map>

#include "gamm/mann_whitney.hpp"
#include "gamm/metrics.hpp"

namespace gamm {

const char* to_string(Direction d) {
  switch (d) {
    case Direction::degradation: return "degradation";
    case Direction::no_change: return "no_change";
    case Direction::improvement: return "improvement";
  }
  return "?";
}

ComparisonTable build_comparison_table(std::span<const MetricSample> samples,
                                       const std::string& mech_ref,
                                       const std::string& mech_new, double p_miss) {
  ComparisonTable table;
  table.mech_ref = mech_ref;
  table.mech_new = mech_new;
  table.p_miss = p_miss;
  table.summary.family = mech_ref + " vs " + mech_new;

  // Repetition samples per (imputer, dataset) and side.
  struct CellSamples {
    std::vector<double> ref;
    std::vector<double> neu;
  };
  std::map<std::pair<std::string, std::string>, CellSamples> cells;
  for (const MetricSample& s : samples) {
    if (s.p_miss != p_miss) continue;
    if (s.mechanism != mech_ref && s.mechanism != mech_new) continue;
    auto& cell = cells[{s.imputer, s.dataset}];
    (s.mechanism == mech_ref ? cell.ref : cell.neu).push_back(s.mae);
  }

  for (auto& [key, cell] : cells) {
    const auto& [imputer, dataset] = key;
    if (cell.ref.size() < 2 || cell.neu.size() < 2) {
      table.missing_cells.push_back(imputer + "/" + dataset + ": " +
                                    std::to_string(cell.ref.size()) + " ref vs " +
                                    std::to_string(cell.neu.size()) + " new repetitions");
      continue;
    }
    double mean_ref = 0.0;
    double mean_new = 0.0;
    for (double v : cell.ref) mean_ref += v;
    for (double v : cell.neu) mean_new += v;
    mean_ref /= static_cast<double>(cell.ref.size());
    mean_new /= static_cast<double>(cell.neu.size());

    ComparisonCell out;
    out.imputer = imputer;
    out.dataset = dataset;
    out.mech_ref = mech_ref;
    out.mech_new = mech_new;
    out.p_miss = p_miss;
    out.degradation_pct = degradation_pct(mean_ref, mean_new);
    auto mwu = mann_whitney_u(cell.ref, cell.neu);
    out.u_statistic = mwu.u;
    out.p_value = mwu.p_two_sided;
    out.significant = out.p_value < 0.05;
    if (!out.significant || mean_ref == mean_new) {
      out.direction = Direction::no_change;
    } else {
      out.direction = mean_new > mean_ref ? Direction::degradation : Direction::improvement;
    }
    switch (out.direction) {
      case Direction::degradation: ++table.summary.degradation; break;
      case Direction::no_change: ++table.summary.no_change; break;
      case Direction::improvement: ++table.summary.improvement; break;
    }
    table.cells.push_back(std::move(out));
  }
  // std::map iteration already yields (imputer, dataset) order.
  return table;
}

OutcomeSummary summarize(const std::vector<ComparisonTable>& tables, std::string family) {
  OutcomeSummary out;
  out.family = std::move(family);
  for (const auto& t : tables) {
    out.degradation += t.summary.degradation;
    out.no_change += t.summary.no_change;
    out.improvement += t.summary.improvement;
  }
  return out;
}

}  // namespace gamm
