#pragma once

#include <cstddef>

#include "gamm/mask.hpp"
#include "gamm/matrix.hpp"

namespace gamm {

struct MaeRmse {
  double mae = 0.0;
  double rmse = 0.0;
  std::size_t missing_entries = 0;
};

/// Reconstruction error over masked entries only (Omega = 0 in missable
/// columns). Throws when the mask contains no missing entry.
MaeRmse masked_mae_rmse(const Matrix& truth, const Matrix& imputed, const Mask& mask);

/// 100 * (ref - new) / ref. Negative when the new condition has the larger
/// error, i.e. a deterioration. metric_ref must be > 0.
double degradation_pct(double metric_ref, double metric_new);

}  // namespace gamm
