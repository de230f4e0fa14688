#pragma once

#include <span>
#include <vector>

namespace gamm {

struct DensityExport {
  std::vector<double> x;
  std::vector<double> density;
  double bandwidth = 0.0;
};

/// Silverman rule of thumb h = 0.9 * min(sd, IQR/1.34) * m^(-1/5), floored
/// at 1e-6 so degenerate spreads stay well defined.
double silverman_bandwidth(std::span<const double> values);

/// Gaussian KDE evaluated at a single point.
double kde_pdf(std::span<const double> values, double bandwidth, double x);

/// Gaussian KDE on a uniform grid spanning [min - 3h, max + 3h]; the
/// trapezoid integral of the result is 1 within 1%.
DensityExport kde_export(std::span<const double> values, std::size_t grid_size = 512);

/// Same estimator evaluated on a caller-provided grid (used to put several
/// sources on one axis).
DensityExport kde_on_grid(std::span<const double> values, std::span<const double> grid);

}  // namespace gamm
