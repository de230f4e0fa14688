#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "gamm/graph.hpp"
#include "gamm/mask.hpp"
#include "gamm/matrix.hpp"

namespace gamm {

/// Missingness mechanism taxonomy. Prefixes: A = node's own attributes,
/// S = structural properties, N = neighbors' attributes, G = weighted
/// combination. S_MNAR is representable so that requesting it yields the
/// documented "unsupported under fully observed topology" error.
enum class MechanismKind : int {
  MCAR,
  A_MAR,
  A_MNAR,
  S_MAR,
  S_MNAR,
  N_MAR,
  N_MNAR,
  G_MAR,
  G_MNAR,
};

enum class Sign { positive, negative };

const char* to_string(MechanismKind kind);
MechanismKind mechanism_kind_from_string(const std::string& name);
bool is_mar(MechanismKind kind);    // requires a non-empty observed column set
bool is_neigh(MechanismKind kind);  // consumes h-hop neighborhoods
bool is_generic(MechanismKind kind);

/// Component weights for G- mechanisms: attribute, structure, neighborhood.
struct GWeights {
  double w_attr = 1.0;
  double w_struct = 1.0;
  double w_neigh = 1.0;
};

/// Declarative description of one mechanism instance. JSON keys mirror the
/// field names; see to_json_string / from_json_string.
struct MechanismSpec {
  MechanismKind kind = MechanismKind::MCAR;
  double p_miss = 0.5;         // target overall missing rate over missable entries
  int hops = 1;                // neighborhood radius for N- and G- kinds
  double omega = 3.0;          // dependence strength
  std::optional<Sign> sign;    // direction; per-kind default when unset
  ColumnSplit column_split;    // observed (never masked) vs missable columns
  std::optional<GWeights> g_weights;    // G- kinds only; not all zero
  std::optional<int> a_mar_column;      // restrict the A-MAR driver to one observed column
  std::uint64_t seed = 0;

  /// Effective direction: explicit sign if set, else the per-kind default
  /// (A-MNAR/N-MNAR/G- positive; A-MAR/S-MAR/N-MAR negative).
  Sign resolved_sign() const;

  /// Shape-independent validation plus column checks against d.
  void validate(std::size_t d) const;

  std::string to_json_string() const;
  static MechanismSpec from_json_string(const std::string& json_text);
};

/// Standardized per-entry driver z_ij feeding sigma(s * omega * z + b).
/// Entries in observed columns are zero and ignored. `column_uniform` marks
/// drivers that do not vary across missable columns (MCAR, A-MAR, S-MAR,
/// N-MAR, G-MAR), which lets calibration average over nodes only.
struct DriverMatrix {
  Matrix z;  // n x d, or n x 1 when column_uniform
  std::vector<std::uint8_t> constant_driver;  // per column; such columns degrade to MCAR
  bool column_uniform = false;

  double value(std::size_t i, std::size_t j) const {
    return column_uniform ? z(i, 0) : z(i, j);
  }
};

struct CalibrationResult {
  double bias = 0.0;
  double achieved_expected_rate = 0.0;
  int iterations = 0;
  double tolerance = 0.0;
};

/// Numerically stable logistic function.
double sigmoid(double x);
double logit(double p);

DriverMatrix build_driver(const AttributedGraph& g, const StructuralProfile& profile,
                          const MechanismSpec& spec);

/// Solves mean over missable entries of sigma(s*omega*z + b) = p_miss by
/// bisection; the objective is continuous and strictly increasing in b, and
/// the bracket [logit(p) - max|omega z| - 1, logit(p) + max|omega z| + 1]
/// always straddles the root. Achieved rate is within 1e-9 of the target.
CalibrationResult calibrate_bias(const DriverMatrix& driver, const MechanismSpec& spec);

/// Builds the driver, calibrates the bias, and samples
/// Omega_ij ~ Bernoulli(1 - sigma(s*omega*z_ij + b)) per missable entry from
/// a substream seeded by spec.seed. Observed columns are forced to 1. The
/// mask carries the spec and calibration summary as JSON provenance.
Mask generate_mask(const AttributedGraph& g, const MechanismSpec& spec);

}  // namespace gamm
