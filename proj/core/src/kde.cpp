#include "gamm/kde.hpp"

#include <algorithm>
#include <cmath>

#include "gamm/error.hpp"

namespace gamm {

namespace {

constexpr double kBandwidthFloor = 1e-6;
const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * M_PI);

double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - std::floor(pos);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

void check_values(std::span<const double> values) {
  if (values.empty()) throw Error("kde: empty input");
  for (double v : values) {
    if (!std::isfinite(v)) throw Error("kde: non-finite input value");
  }
}

}  // namespace

double silverman_bandwidth(std::span<const double> values) {
  check_values(values);
  const auto m = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= m;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = values.size() > 1 ? std::sqrt(ss / (m - 1.0)) : 0.0;

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);

  const double spread = std::min(sd, iqr / 1.34);
  const double h = 0.9 * spread * std::pow(m, -0.2);
  return std::max(h, kBandwidthFloor);
}

double kde_pdf(std::span<const double> values, double bandwidth, double x) {
  check_values(values);
  if (!(bandwidth > 0.0)) throw Error("kde: bandwidth must be > 0");
  double sum = 0.0;
  for (double v : values) {
    const double z = (x - v) / bandwidth;
    sum += std::exp(-0.5 * z * z);
  }
  return sum * kInvSqrt2Pi / (bandwidth * static_cast<double>(values.size()));
}

DensityExport kde_on_grid(std::span<const double> values, std::span<const double> grid) {
  DensityExport out;
  out.bandwidth = silverman_bandwidth(values);
  out.x.assign(grid.begin(), grid.end());
  out.density.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out.density[i] = kde_pdf(values, out.bandwidth, grid[i]);
  }
  return out;
}

DensityExport kde_export(std::span<const double> values, std::size_t grid_size) {
  check_values(values);
  if (grid_size < 2) throw Error("kde: grid must have at least 2 points");
  const double h = silverman_bandwidth(values);
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  const double lo = *mn - 3.0 * h;
  const double hi = *mx + 3.0 * h;
  std::vector<double> grid(grid_size);
  const double step = (hi - lo) / static_cast<double>(grid_size - 1);
  for (std::size_t i = 0; i < grid_size; ++i) grid[i] = lo + step * static_cast<double>(i);
  return kde_on_grid(values, grid);
}

}  // namespace gamm
