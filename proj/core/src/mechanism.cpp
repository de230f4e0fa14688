#include "gamm/mechanism.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <span>

#include <nlohmann/json.hpp>

#include "gamm/error.hpp"
#include "gamm/rng.hpp"

namespace gamm {

const char* to_string(MechanismKind kind) {
  switch (kind) {
    case MechanismKind::MCAR: return "MCAR";
    case MechanismKind::A_MAR: return "A-MAR";
    case MechanismKind::A_MNAR: return "A-MNAR";
    case MechanismKind::S_MAR: return "S-MAR";
    case MechanismKind::S_MNAR: return "S-MNAR";
    case MechanismKind::N_MAR: return "N-MAR";
    case MechanismKind::N_MNAR: return "N-MNAR";
    case MechanismKind::G_MAR: return "G-MAR";
    case MechanismKind::G_MNAR: return "G-MNAR";
  }
  return "?";
}

MechanismKind mechanism_kind_from_string(const std::string& name) {
  std::string canon;
  for (char c : name) canon.push_back(c == '_' ? '-' : static_cast<char>(std::toupper(c)));
  for (MechanismKind k :
       {MechanismKind::MCAR, MechanismKind::A_MAR, MechanismKind::A_MNAR, MechanismKind::S_MAR,
        MechanismKind::S_MNAR, MechanismKind::N_MAR, MechanismKind::N_MNAR, MechanismKind::G_MAR,
        MechanismKind::G_MNAR}) {
    if (canon == to_string(k)) return k;
  }
  throw ConfigError("unknown mechanism kind \"" + name + "\"");
}

bool is_mar(MechanismKind kind) {
  return kind == MechanismKind::A_MAR || kind == MechanismKind::N_MAR ||
         kind == MechanismKind::G_MAR;
}

bool is_neigh(MechanismKind kind) {
  return kind == MechanismKind::N_MAR || kind == MechanismKind::N_MNAR || is_generic(kind);
}

bool is_generic(MechanismKind kind) {
  return kind == MechanismKind::G_MAR || kind == MechanismKind::G_MNAR;
}

Sign MechanismSpec::resolved_sign() const {
  if (sign) return *sign;
  switch (kind) {
    case MechanismKind::A_MAR:
    case MechanismKind::S_MAR:
    case MechanismKind::N_MAR:
      return Sign::negative;
    default:
      return Sign::positive;
  }
}

void MechanismSpec::validate(std::size_t d) const {
  if (!(p_miss > 0.0 && p_miss < 1.0)) {
    throw ConfigError("p_miss must lie in (0, 1)");
  }
  if (!std::isfinite(omega)) throw ConfigError("omega must be finite");
  column_split.validate(d);
  if (column_split.observed_columns.size() == d) {
    throw ConfigError("every column is observed; nothing can be masked");
  }
  if (kind == MechanismKind::S_MNAR) {
    throw ConfigError(
        "S-MNAR is unsupported under fully observed topology (no missing structural data)");
  }
  if (is_mar(kind) && column_split.observed_columns.empty()) {
    throw ConfigError(std::string(to_string(kind)) +
                      " requires at least one observed column");
  }
  if (is_neigh(kind) && hops < 1) {
    throw ConfigError(std::string(to_string(kind)) + " requires hops >= 1");
  }
  if (g_weights) {
    if (!is_generic(kind)) {
      throw ConfigError("g_weights are only legal for G- mechanisms");
    }
    if (g_weights->w_attr == 0.0 && g_weights->w_struct == 0.0 && g_weights->w_neigh == 0.0) {
      throw ConfigError("g_weights must not be all zero");
    }
  }
  if (a_mar_column) {
    if (kind != MechanismKind::A_MAR && kind != MechanismKind::G_MAR) {
      throw ConfigError("a_mar_column only applies to A-MAR or G-MAR");
    }
    if (!column_split.is_observed(*a_mar_column)) {
      throw ConfigError("a_mar_column must be one of the observed columns");
    }
  }
}

double sigmoid(double x) {
  if (x >= 0.0) {
    double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p / (1.0 - p)); }

namespace {

// Z-scores `values` in place over entries with defined[i] != 0; undefined
// entries become 0 (the post-standardization mean). Returns true when the
// defined values are (numerically) constant, in which case everything is
// zeroed and the driver degrades to MCAR.
bool zscore(std::span<double> values, std::span<const std::uint8_t> defined) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (defined[i]) {
      sum += values[i];
      ++count;
    }
  }
  if (count == 0) {
    std::fill(values.begin(), values.end(), 0.0);
    return true;
  }
  const double mean = sum / static_cast<double>(count);
  double ss = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (defined[i]) {
      double dev = values[i] - mean;
      ss += dev * dev;
    }
  }
  const double sd = std::sqrt(ss / static_cast<double>(count));
  if (sd <= 1e-12 * (1.0 + std::abs(mean))) {
    std::fill(values.begin(), values.end(), 0.0);
    return true;
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = defined[i] ? (values[i] - mean) / sd : 0.0;
  }
  return false;
}

struct NodeDriver {
  std::vector<double> value;
  std::vector<std::uint8_t> defined;
};

// Mean of a node's own observed-column values (or the single designated
// column). Raw, not yet standardized.
NodeDriver own_attribute_driver(const AttributedGraph& g, const MechanismSpec& spec) {
  const std::size_t n = g.num_nodes();
  const Matrix& f = g.features();
  NodeDriver drv{std::vector<double>(n, 0.0), std::vector<std::uint8_t>(n, 1)};
  if (spec.a_mar_column) {
    int j = *spec.a_mar_column;
    for (std::size_t i = 0; i < n; ++i) drv.value[i] = f(i, static_cast<std::size_t>(j));
    return drv;
  }
  const auto& obs = spec.column_split.observed_columns;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j : obs) s += f(i, static_cast<std::size_t>(j));
    drv.value[i] = s / static_cast<double>(obs.size());
  }
  return drv;
}

NodeDriver degree_driver(const StructuralProfile& profile) {
  NodeDriver drv;
  drv.value = profile.log1p_degree;
  drv.defined.assign(drv.value.size(), 1);
  return drv;
}

std::vector<std::vector<NodeId>> hop_sets(const AttributedGraph& g, int hops) {
  std::vector<std::vector<NodeId>> sets(g.num_nodes());
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    sets[i] = k_hop_neighbors(g, static_cast<NodeId>(i), hops);
  }
  return sets;
}

// Mean over the h-hop neighborhood of each node's own observed-column mean.
NodeDriver neighbor_observed_driver(const AttributedGraph& g,
                                    const std::vector<std::vector<NodeId>>& hood,
                                    const MechanismSpec& spec) {
  const std::size_t n = g.num_nodes();
  const Matrix& f = g.features();
  const auto& obs = spec.column_split.observed_columns;
  std::vector<double> own(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j : obs) s += f(i, static_cast<std::size_t>(j));
    own[i] = s / static_cast<double>(obs.size());
  }
  NodeDriver drv{std::vector<double>(n, 0.0), std::vector<std::uint8_t>(n, 0)};
  for (std::size_t i = 0; i < n; ++i) {
    if (hood[i].empty()) continue;
    double s = 0.0;
    for (NodeId k : hood[i]) s += own[static_cast<std::size_t>(k)];
    drv.value[i] = s / static_cast<double>(hood[i].size());
    drv.defined[i] = 1;
  }
  return drv;
}

// Per-column mean over the h-hop neighborhood of the TRUE column values
// (masks are generated before any value is withheld).
NodeDriver neighbor_column_driver(const AttributedGraph& g,
                                  const std::vector<std::vector<NodeId>>& hood,
                                  std::size_t col) {
  const std::size_t n = g.num_nodes();
  const Matrix& f = g.features();
  NodeDriver drv{std::vector<double>(n, 0.0), std::vector<std::uint8_t>(n, 0)};
  for (std::size_t i = 0; i < n; ++i) {
    if (hood[i].empty()) continue;
    double s = 0.0;
    for (NodeId k : hood[i]) s += f(static_cast<std::size_t>(k), col);
    drv.value[i] = s / static_cast<double>(hood[i].size());
    drv.defined[i] = 1;
  }
  return drv;
}

DriverMatrix uniform_driver(std::vector<double> node_values, bool constant, std::size_t d,
                            const ColumnSplit& split) {
  DriverMatrix out;
  out.column_uniform = true;
  out.z = Matrix(node_values.size(), 1);
  out.z.storage() = std::move(node_values);
  out.constant_driver.assign(d, constant ? 1 : 0);
  for (int j : split.observed_columns) out.constant_driver[static_cast<std::size_t>(j)] = 1;
  return out;
}

DriverMatrix build_uniform_kind(const AttributedGraph& g, const StructuralProfile& profile,
                                const MechanismSpec& spec, MechanismKind kind) {
  const std::size_t n = g.num_nodes();
  const std::size_t d = g.num_features();
  NodeDriver drv;
  switch (kind) {
    case MechanismKind::MCAR:
      return uniform_driver(std::vector<double>(n, 0.0), true, d, spec.column_split);
    case MechanismKind::A_MAR:
      drv = own_attribute_driver(g, spec);
      break;
    case MechanismKind::S_MAR:
      drv = degree_driver(profile);
      break;
    case MechanismKind::N_MAR:
      drv = neighbor_observed_driver(g, hop_sets(g, spec.hops), spec);
      break;
    default:
      throw Error("internal: not a column-uniform mechanism");
  }
  bool constant = zscore(drv.value, drv.defined);
  return uniform_driver(std::move(drv.value), constant, d, spec.column_split);
}

DriverMatrix build_columnwise_kind(const AttributedGraph& g, const MechanismSpec& spec,
                                   MechanismKind kind) {
  const std::size_t n = g.num_nodes();
  const std::size_t d = g.num_features();
  const Matrix& f = g.features();
  DriverMatrix out;
  out.column_uniform = false;
  out.z = Matrix(n, d, 0.0);
  out.constant_driver.assign(d, 1);

  std::vector<std::vector<NodeId>> hood;
  if (kind == MechanismKind::N_MNAR) hood = hop_sets(g, spec.hops);

  for (int j : spec.column_split.missable_columns(d)) {
    auto col = static_cast<std::size_t>(j);
    NodeDriver drv;
    if (kind == MechanismKind::A_MNAR) {
      drv.value.resize(n);
      for (std::size_t i = 0; i < n; ++i) drv.value[i] = f(i, col);
      drv.defined.assign(n, 1);
    } else {
      drv = neighbor_column_driver(g, hood, col);
    }
    bool constant = zscore(drv.value, drv.defined);
    out.constant_driver[col] = constant ? 1 : 0;
    for (std::size_t i = 0; i < n; ++i) out.z(i, col) = drv.value[i];
  }
  return out;
}

DriverMatrix build_generic(const AttributedGraph& g, const StructuralProfile& profile,
                           const MechanismSpec& spec) {
  const std::size_t n = g.num_nodes();
  const std::size_t d = g.num_features();
  const GWeights w = spec.g_weights.value_or(GWeights{});
  const bool mnar = spec.kind == MechanismKind::G_MNAR;

  MechanismSpec component = spec;
  component.g_weights.reset();

  auto build_component = [&](MechanismKind kind) {
    component.kind = kind;
    component.a_mar_column =
        kind == MechanismKind::A_MAR ? spec.a_mar_column : std::nullopt;
    return build_driver(g, profile, component);
  };

  struct Part {
    double weight;
    MechanismKind kind;
  };
  std::vector<Part> parts;
  if (w.w_attr != 0.0) {
    parts.push_back({w.w_attr, mnar ? MechanismKind::A_MNAR : MechanismKind::A_MAR});
  }
  if (w.w_struct != 0.0) parts.push_back({w.w_struct, MechanismKind::S_MAR});
  if (w.w_neigh != 0.0) {
    parts.push_back({w.w_neigh, mnar ? MechanismKind::N_MNAR : MechanismKind::N_MAR});
  }

  // Single-component combinations reduce exactly to that component's driver
  // (standardizing w*z is z up to the weight's sign).
  if (parts.size() == 1) {
    DriverMatrix only = build_component(parts[0].kind);
    if (parts[0].weight < 0.0) {
      for (double& v : only.z.storage()) v = -v;
    }
    return only;
  }

  std::vector<DriverMatrix> components;
  components.reserve(parts.size());
  for (const Part& p : parts) components.push_back(build_component(p.kind));

  DriverMatrix out;
  if (!mnar) {
    // All components are per-node; combine and re-standardize globally.
    std::vector<double> combined(n, 0.0);
    for (std::size_t c = 0; c < parts.size(); ++c) {
      for (std::size_t i = 0; i < n; ++i) {
        combined[i] += parts[c].weight * components[c].z(i, 0);
      }
    }
    std::vector<std::uint8_t> defined(n, 1);
    bool constant = zscore(combined, defined);
    out = uniform_driver(std::move(combined), constant, d, spec.column_split);
    return out;
  }

  out.column_uniform = false;
  out.z = Matrix(n, d, 0.0);
  out.constant_driver.assign(d, 1);
  std::vector<double> combined(n);
  std::vector<std::uint8_t> defined(n, 1);
  for (int j : spec.column_split.missable_columns(d)) {
    auto col = static_cast<std::size_t>(j);
    std::fill(combined.begin(), combined.end(), 0.0);
    for (std::size_t c = 0; c < parts.size(); ++c) {
      for (std::size_t i = 0; i < n; ++i) {
        combined[i] += parts[c].weight * components[c].value(i, col);
      }
    }
    bool constant = zscore(combined, defined);
    out.constant_driver[col] = constant ? 1 : 0;
    for (std::size_t i = 0; i < n; ++i) out.z(i, col) = combined[i];
  }
  return out;
}

}  // namespace

DriverMatrix build_driver(const AttributedGraph& g, const StructuralProfile& profile,
                          const MechanismSpec& spec) {
  spec.validate(g.num_features());
  switch (spec.kind) {
    case MechanismKind::MCAR:
    case MechanismKind::A_MAR:
    case MechanismKind::S_MAR:
    case MechanismKind::N_MAR:
      return build_uniform_kind(g, profile, spec, spec.kind);
    case MechanismKind::A_MNAR:
    case MechanismKind::N_MNAR:
      return build_columnwise_kind(g, spec, spec.kind);
    case MechanismKind::G_MAR:
    case MechanismKind::G_MNAR:
      return build_generic(g, profile, spec);
    case MechanismKind::S_MNAR:
      break;  // validate() already rejected it
  }
  throw ConfigError("S-MNAR is unsupported under fully observed topology");
}

namespace {

// Mean missingness probability over missable entries for a candidate bias.
double expected_rate(const DriverMatrix& driver, const std::vector<int>& missable,
                     double scale, double bias) {
  const std::size_t n = driver.z.rows();
  double sum = 0.0;
  if (driver.column_uniform) {
    // Every node owns the same missable columns, so the entry mean equals
    // the node mean.
    for (std::size_t i = 0; i < n; ++i) {
      sum += sigmoid(scale * driver.z(i, 0) + bias);
    }
    return sum / static_cast<double>(n);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (int j : missable) {
      sum += sigmoid(scale * driver.z(i, static_cast<std::size_t>(j)) + bias);
    }
  }
  return sum / static_cast<double>(n * missable.size());
}

}  // namespace

CalibrationResult calibrate_bias(const DriverMatrix& driver, const MechanismSpec& spec) {
  if (!(spec.p_miss > 0.0 && spec.p_miss < 1.0)) {
    throw ConfigError("p_miss must lie in (0, 1)");
  }
  const double target = spec.p_miss;
  const double scale =
      (spec.resolved_sign() == Sign::positive ? 1.0 : -1.0) * spec.omega;
  std::vector<int> cols;
  if (!driver.column_uniform) {
    cols = spec.column_split.missable_columns(driver.z.cols());
  }

  CalibrationResult result;
  result.tolerance = 1e-9;

  double max_abs = 0.0;
  if (driver.column_uniform) {
    for (std::size_t i = 0; i < driver.z.rows(); ++i) {
      max_abs = std::max(max_abs, std::abs(scale * driver.z(i, 0)));
    }
  } else {
    for (std::size_t i = 0; i < driver.z.rows(); ++i) {
      for (int j : cols) {
        max_abs = std::max(max_abs, std::abs(scale * driver.z(i, static_cast<std::size_t>(j))));
      }
    }
  }

  if (max_abs == 0.0) {
    result.bias = logit(target);
    result.achieved_expected_rate = sigmoid(result.bias);
    result.iterations = 0;
    return result;
  }

  double lo = logit(target) - max_abs - 1.0;
  double hi = logit(target) + max_abs + 1.0;
  double bias = 0.5 * (lo + hi);
  double achieved = 0.0;
  int iters = 0;
  for (; iters < 200; ++iters) {
    const double mid = 0.5 * (lo + hi);
    bias = mid;
    achieved = expected_rate(driver, cols, scale, bias);
    if (std::abs(achieved - target) <= 5e-13) break;
    if (mid == lo || mid == hi) break;  // interval exhausted at double precision
    if (achieved < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (std::abs(achieved - target) > result.tolerance) {
    throw Error("bias calibration failed to converge");
  }
  result.bias = bias;
  result.achieved_expected_rate = achieved;
  result.iterations = iters + 1;
  return result;
}

namespace {

nlohmann::ordered_json spec_to_json(const MechanismSpec& spec) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(spec.kind);
  j["p_miss"] = spec.p_miss;
  j["hops"] = spec.hops;
  j["omega"] = spec.omega;
  j["sign"] = spec.resolved_sign() == Sign::positive ? "positive" : "negative";
  j["observed_columns"] = spec.column_split.observed_columns;
  if (spec.g_weights) {
    j["g_weights"] = {spec.g_weights->w_attr, spec.g_weights->w_struct,
                      spec.g_weights->w_neigh};
  }
  if (spec.a_mar_column) j["a_mar_column"] = *spec.a_mar_column;
  j["seed"] = spec.seed;
  return j;
}

}  // namespace

std::string MechanismSpec::to_json_string() const {
  return spec_to_json(*this).dump();
}

MechanismSpec MechanismSpec::from_json_string(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("mechanism spec is not valid JSON: " + std::string(e.what()));
  }
  static const char* known[] = {"kind",      "p_miss",           "hops",        "omega",
                                "sign",      "observed_columns", "g_weights",   "a_mar_column",
                                "seed"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || (it.key() == k);
    if (!ok) throw ConfigError("mechanism spec: unknown key \"" + it.key() + "\"");
  }
  MechanismSpec spec;
  try {
    if (!j.contains("kind")) throw ConfigError("mechanism spec: missing \"kind\"");
    spec.kind = mechanism_kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("p_miss")) spec.p_miss = j.at("p_miss").get<double>();
    if (j.contains("hops")) spec.hops = j.at("hops").get<int>();
    if (j.contains("omega")) spec.omega = j.at("omega").get<double>();
    if (j.contains("sign")) {
      std::string s = j.at("sign").get<std::string>();
      if (s == "positive") {
        spec.sign = Sign::positive;
      } else if (s == "negative") {
        spec.sign = Sign::negative;
      } else {
        throw ConfigError("mechanism spec: sign must be \"positive\" or \"negative\"");
      }
    }
    if (j.contains("observed_columns")) {
      spec.column_split.observed_columns =
          normalize_columns(j.at("observed_columns").get<std::vector<int>>());
    }
    if (j.contains("g_weights")) {
      auto w = j.at("g_weights").get<std::vector<double>>();
      if (w.size() != 3) {
        throw ConfigError("mechanism spec: g_weights must be [w_attr, w_struct, w_neigh]");
      }
      spec.g_weights = GWeights{w[0], w[1], w[2]};
    }
    if (j.contains("a_mar_column")) spec.a_mar_column = j.at("a_mar_column").get<int>();
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("mechanism spec: " + std::string(e.what()));
  }
  if (!(spec.p_miss > 0.0 && spec.p_miss < 1.0)) {
    throw ConfigError("mechanism spec: p_miss must lie in (0, 1)");
  }
  return spec;
}

Mask generate_mask(const AttributedGraph& g, const MechanismSpec& spec) {
  const std::size_t n = g.num_nodes();
  const std::size_t d = g.num_features();
  spec.validate(d);

  StructuralProfile profile = structural_profile(g);
  DriverMatrix driver = build_driver(g, profile, spec);
  CalibrationResult calib = calibrate_bias(driver, spec);

  const double scale =
      (spec.resolved_sign() == Sign::positive ? 1.0 : -1.0) * spec.omega;
  Mask mask(n, d, spec.column_split);
  auto eng = make_engine(spec.seed);
  const auto missable = spec.column_split.missable_columns(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (int j : missable) {
      const double p = sigmoid(scale * driver.value(i, static_cast<std::size_t>(j)) +
                               calib.bias);
      mask.set(i, static_cast<std::size_t>(j), !(uniform01(eng) < p));
    }
  }

  nlohmann::ordered_json prov;
  prov["spec"] = spec_to_json(spec);
  prov["calibration"] = {{"bias", calib.bias},
                         {"achieved_expected_rate", calib.achieved_expected_rate},
                         {"iterations", calib.iterations},
                         {"tolerance", calib.tolerance}};
  mask.provenance = prov.dump();
  return mask;
}

}  // namespace gamm
