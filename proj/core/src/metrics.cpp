#include "gamm/metrics.hpp"

#include <cmath>

#include "gamm/error.hpp"

namespace gamm {

MaeRmse masked_mae_rmse(const Matrix& truth, const Matrix& imputed, const Mask& mask) {
  if (truth.rows() != imputed.rows() || truth.cols() != imputed.cols() ||
      truth.rows() != mask.rows() || truth.cols() != mask.cols()) {
    throw Error("masked_mae_rmse: shape mismatch");
  }
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  std::size_t count = 0;
  const auto missable = mask.split().missable_columns(truth.cols());
  for (std::size_t i = 0; i < truth.rows(); ++i) {
    for (int j : missable) {
      auto col = static_cast<std::size_t>(j);
      if (mask.observed(i, col)) continue;
      const double diff = imputed(i, col) - truth(i, col);
      abs_sum += std::abs(diff);
      sq_sum += diff * diff;
      ++count;
    }
  }
  if (count == 0) {
    throw Error("masked_mae_rmse: mask has no missing entries; metric undefined");
  }
  MaeRmse out;
  out.missing_entries = count;
  out.mae = abs_sum / static_cast<double>(count);
  out.rmse = std::sqrt(sq_sum / static_cast<double>(count));
  return out;
}

double degradation_pct(double metric_ref, double metric_new) {
  if (!(metric_ref > 0.0)) {
    throw Error("degradation_pct: reference metric must be > 0");
  }
  return 100.0 * (metric_ref - metric_new) / metric_ref;
}

}  // namespace gamm
