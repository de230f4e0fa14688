#include "gamm/mann_whitney.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "gamm/error.hpp"

namespace gamm {

namespace {

constexpr std::size_t kExactLimit = 24;  // exact enumeration for n1 + n2 <= 24

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace

MwuResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
  const std::size_t n1 = a.size();
  const std::size_t n2 = b.size();
  if (n1 == 0 || n2 == 0) throw Error("mann_whitney_u requires two non-empty samples");
  const std::size_t n = n1 + n2;

  // Sort (value, is_a) pairs and assign doubled midranks, which stay integral
  // under ties: a tie run over 0-based positions [p, q] has midrank
  // (p + q + 2) / 2, i.e. doubled midrank p + q + 2.
  std::vector<std::pair<double, int>> pooled;
  pooled.reserve(n);
  for (double v : a) pooled.emplace_back(v, 1);
  for (double v : b) pooled.emplace_back(v, 0);
  std::sort(pooled.begin(), pooled.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });

  std::vector<long long> doubled_rank(n, 0);
  double tie_sum = 0.0;  // sum over tie runs of t^3 - t
  for (std::size_t p = 0; p < n;) {
    std::size_t q = p;
    while (q + 1 < n && pooled[q + 1].first == pooled[p].first) ++q;
    const long long dr = static_cast<long long>(p + q + 2);
    for (std::size_t i = p; i <= q; ++i) doubled_rank[i] = dr;
    const double t = static_cast<double>(q - p + 1);
    tie_sum += t * t * t - t;
    p = q + 1;
  }

  long long doubled_rank_sum_a = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (pooled[i].second == 1) doubled_rank_sum_a += doubled_rank[i];
  }
  // 2U = 2 * (R_A - n1(n1+1)/2)
  const long long doubled_u = doubled_rank_sum_a - static_cast<long long>(n1 * (n1 + 1));
  const long long doubled_mu = static_cast<long long>(n1 * n2);  // 2 * n1 n2 / 2

  MwuResult result;
  result.u = 0.5 * static_cast<double>(doubled_u);
  result.degenerate = pooled.front().first == pooled.back().first;
  result.exact = n <= kExactLimit;
  if (result.degenerate) {
    result.p_two_sided = 1.0;
    return result;
  }

  if (result.exact) {
    // Count subsets of size n1 by doubled-rank sum with a 0/1 knapsack over
    // the pooled multiset; the permutation distribution of U follows.
    const std::size_t max_sum = n * (n + 1);
    std::vector<std::vector<std::uint64_t>> dp(
        n1 + 1, std::vector<std::uint64_t>(max_sum + 1, 0));
    dp[0][0] = 1;
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = static_cast<std::size_t>(doubled_rank[i]);
      for (std::size_t k = std::min(i + 1, n1); k >= 1; --k) {
        for (std::size_t s = max_sum; s >= r; --s) {
          if (dp[k - 1][s - r] != 0) dp[k][s] += dp[k - 1][s - r];
        }
      }
    }
    const long long observed_dev = std::llabs(doubled_u - doubled_mu);
    std::uint64_t total = 0;
    std::uint64_t extreme = 0;
    for (std::size_t s = 0; s <= max_sum; ++s) {
      if (dp[n1][s] == 0) continue;
      total += dp[n1][s];
      const long long du = static_cast<long long>(s) - static_cast<long long>(n1 * (n1 + 1));
      if (std::llabs(du - doubled_mu) >= observed_dev) extreme += dp[n1][s];
    }
    result.p_two_sided = static_cast<double>(extreme) / static_cast<double>(total);
    return result;
  }

  const double mu = 0.5 * static_cast<double>(n1) * static_cast<double>(n2);
  const double nn = static_cast<double>(n);
  const double tie_correction = tie_sum / (nn * (nn - 1.0));
  const double var = (static_cast<double>(n1) * static_cast<double>(n2) / 12.0) *
                     ((nn + 1.0) - tie_correction);
  if (var <= 0.0) {
    result.p_two_sided = 1.0;
    result.degenerate = true;
    return result;
  }
  double dev = std::abs(result.u - mu) - 0.5;  // continuity correction
  if (dev < 0.0) dev = 0.0;
  result.p_two_sided = std::min(1.0, 2.0 * normal_sf(dev / std::sqrt(var)));
  return result;
}

}  // namespace gamm
