#pragma once

#include <span>

namespace gamm {

struct MwuResult {
  double u = 0.0;           // U statistic of the first sample (midrank ties)
  double p_two_sided = 1.0;
  bool exact = false;       // exact permutation distribution vs normal approximation
  bool degenerate = false;  // every value identical across both samples
};

/// Two-sided Wilcoxon-Mann-Whitney U test. For n1 + n2 <= 24 the p-value is
/// exact: the permutation distribution of U over all C(n1+n2, n1) rank
/// splits is counted (ties kept as midranks) and the two-sided p is
/// P(|U - n1*n2/2| >= |U_obs - n1*n2/2|). Larger samples use the normal
/// approximation with tie-corrected variance and continuity correction.
MwuResult mann_whitney_u(std::span<const double> a, std::span<const double> b);

}  // namespace gamm
