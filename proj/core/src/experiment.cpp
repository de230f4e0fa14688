#include "gamm/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "gamm/error.hpp"
#include "gamm/graph_io.hpp"
#include "gamm/kde.hpp"
#include "gamm/logging.hpp"
#include "gamm/metrics.hpp"
#include "gamm/report.hpp"
#include "gamm/rng.hpp"
#include "gamm/text.hpp"

namespace gamm {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::string DatasetRef::display_name() const {
  if (!name.empty()) return name;
  if (synth) return synth->name;
  return fs::path(path).filename().string();
}

void ExperimentConfig::validate() const {
  if (datasets.empty()) throw ConfigError("config: at least one dataset is required");
  if (mechanisms.empty()) throw ConfigError("config: at least one mechanism is required");
  if (imputers.empty()) throw ConfigError("config: at least one imputer is required");
  if (repetitions < 1) throw ConfigError("config: repetitions must be >= 1");
  if (jobs < 1) throw ConfigError("config: jobs must be >= 1");
  if (p_miss.empty()) throw ConfigError("config: at least one p_miss rate is required");
  for (double p : p_miss) {
    if (!(p > 0.0 && p < 1.0)) throw ConfigError("config: p_miss values must lie in (0, 1)");
  }
  for (const auto& ds : datasets) {
    if (ds.path.empty() == !ds.synth.has_value()) {
      throw ConfigError("config: each dataset needs exactly one of \"path\" or \"synth\"");
    }
    if (ds.synth) ds.synth->validate();
  }
  std::set<std::string> names;
  for (const auto& ds : datasets) {
    if (!names.insert(ds.display_name()).second) {
      throw ConfigError("config: duplicate dataset name \"" + ds.display_name() + "\"");
    }
  }
  for (const auto& imp : imputers) {
    if (imp == "tabular_mean" || imp == "graph_average" || imp == "feature_propagation") {
      continue;
    }
    if (imp.rfind("external:", 0) == 0) {
      const std::string path = imp.substr(9);
      if (path.empty() || !fs::exists(path)) {
        throw ConfigError("config: external imputer not found: \"" + path + "\"");
      }
      continue;
    }
    throw ConfigError("config: unknown imputer \"" + imp + "\"");
  }
  std::set<std::string> mech_names;
  for (const auto& m : mechanisms) {
    if (!mech_names.insert(to_string(m.kind)).second) {
      throw ConfigError(std::string("config: mechanism ") + to_string(m.kind) +
                        " listed twice");
    }
  }
  for (const auto& [ref, neu] : comparisons) {
    for (const std::string& side : {ref, neu}) {
      if (mech_names.find(to_string(mechanism_kind_from_string(side))) == mech_names.end()) {
        throw ConfigError("config: comparison references unconfigured mechanism \"" + side +
                          "\"");
      }
    }
  }
  imputer_config.validate();
  if (density_grid < 2) throw ConfigError("config: density_grid must be >= 2");
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::resolved_comparisons()
    const {
  if (!comparisons.empty()) {
    auto out = comparisons;
    for (auto& [a, b] : out) {
      a = to_string(mechanism_kind_from_string(a));
      b = to_string(mechanism_kind_from_string(b));
    }
    return out;
  }
  std::set<std::string> present;
  for (const auto& m : mechanisms) present.insert(to_string(m.kind));
  std::vector<std::pair<std::string, std::string>> out;
  if (present.count("A-MAR") && present.count("N-MAR")) out.emplace_back("A-MAR", "N-MAR");
  if (present.count("A-MNAR") && present.count("N-MNAR")) out.emplace_back("A-MNAR", "N-MNAR");
  return out;
}

namespace {

ordered_json mechanism_config_to_json(const MechanismConfig& m) {
  ordered_json j;
  j["kind"] = to_string(m.kind);
  if (m.omega) j["omega"] = *m.omega;
  if (m.sign) j["sign"] = *m.sign == Sign::positive ? "positive" : "negative";
  if (m.hops) j["hops"] = *m.hops;
  if (m.g_weights) j["g_weights"] = {m.g_weights->w_attr, m.g_weights->w_struct,
                                     m.g_weights->w_neigh};
  if (m.observed_columns) j["observed_columns"] = *m.observed_columns;
  if (m.a_mar_column) j["a_mar_column"] = *m.a_mar_column;
  return j;
}

MechanismConfig mechanism_config_from_json(const json& j) {
  static const char* known[] = {"kind", "omega", "sign",        "hops",
                                "g_weights", "observed_columns", "a_mar_column"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || (it.key() == k);
    if (!ok) throw ConfigError("config mechanism: unknown key \"" + it.key() + "\"");
  }
  MechanismConfig m;
  if (!j.contains("kind")) throw ConfigError("config mechanism: missing \"kind\"");
  m.kind = mechanism_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("omega")) m.omega = j.at("omega").get<double>();
  if (j.contains("sign")) {
    std::string s = j.at("sign").get<std::string>();
    if (s != "positive" && s != "negative") {
      throw ConfigError("config mechanism: sign must be positive or negative");
    }
    m.sign = s == "positive" ? Sign::positive : Sign::negative;
  }
  if (j.contains("hops")) m.hops = j.at("hops").get<int>();
  if (j.contains("g_weights")) {
    auto w = j.at("g_weights").get<std::vector<double>>();
    if (w.size() != 3) throw ConfigError("config mechanism: g_weights must have 3 entries");
    m.g_weights = GWeights{w[0], w[1], w[2]};
  }
  if (j.contains("observed_columns")) {
    m.observed_columns = normalize_columns(j.at("observed_columns").get<std::vector<int>>());
  }
  if (j.contains("a_mar_column")) m.a_mar_column = j.at("a_mar_column").get<int>();
  return m;
}

}  // namespace

std::string ExperimentConfig::to_json_string(int indent) const {
  ordered_json j;
  ordered_json ds_arr = ordered_json::array();
  for (const auto& ds : datasets) {
    ordered_json d;
    if (ds.synth) {
      d["synth"] = json::parse(ds.synth->to_json_string());
    } else {
      d["path"] = ds.path;
    }
    if (!ds.name.empty()) d["name"] = ds.name;
    ds_arr.push_back(std::move(d));
  }
  j["datasets"] = std::move(ds_arr);
  ordered_json mech_arr = ordered_json::array();
  for (const auto& m : mechanisms) mech_arr.push_back(mechanism_config_to_json(m));
  j["mechanisms"] = std::move(mech_arr);
  j["p_miss"] = p_miss;
  j["imputers"] = imputers;
  j["repetitions"] = repetitions;
  j["master_seed"] = master_seed;
  j["output_dir"] = output_dir;
  j["jobs"] = jobs;
  j["observed_columns"] = observed_columns;
  ordered_json cmp = ordered_json::array();
  for (const auto& [a, b] : comparisons) cmp.push_back({a, b});
  j["comparisons"] = std::move(cmp);
  j["feature_propagation"] = {{"max_iters", imputer_config.max_iters},
                              {"convergence_tol", imputer_config.convergence_tol}};
  j["plugin_timeout_sec"] = imputer_config.plugin_timeout_sec;
  j["density_features"] = density_features;
  j["density_grid"] = density_grid;
  j["emit_masks"] = emit_masks;
  return indent >= 0 ? j.dump(indent) : j.dump();
}

ExperimentConfig ExperimentConfig::from_json_string(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  static const char* known[] = {"datasets",   "mechanisms",       "p_miss",
                                "imputers",   "repetitions",      "master_seed",
                                "output_dir", "jobs",             "observed_columns",
                                "comparisons", "feature_propagation", "plugin_timeout_sec",
                                "density_features", "density_grid", "emit_masks"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || (it.key() == k);
    if (!ok) throw ConfigError("config: unknown key \"" + it.key() + "\"");
  }
  ExperimentConfig cfg;
  try {
    if (j.contains("datasets")) {
      cfg.datasets.clear();
      for (const auto& d : j.at("datasets")) {
        for (auto it = d.begin(); it != d.end(); ++it) {
          if (it.key() != "path" && it.key() != "synth" && it.key() != "name") {
            throw ConfigError("config dataset: unknown key \"" + it.key() + "\"");
          }
        }
        DatasetRef ref;
        if (d.contains("path")) ref.path = d.at("path").get<std::string>();
        if (d.contains("synth")) {
          ref.synth = SynthSpec::from_json_string(d.at("synth").dump());
        }
        if (d.contains("name")) ref.name = d.at("name").get<std::string>();
        cfg.datasets.push_back(std::move(ref));
      }
    }
    if (j.contains("mechanisms")) {
      cfg.mechanisms.clear();
      for (const auto& m : j.at("mechanisms")) {
        cfg.mechanisms.push_back(mechanism_config_from_json(m));
      }
    }
    if (j.contains("p_miss")) cfg.p_miss = j.at("p_miss").get<std::vector<double>>();
    if (j.contains("imputers")) cfg.imputers = j.at("imputers").get<std::vector<std::string>>();
    if (j.contains("repetitions")) cfg.repetitions = j.at("repetitions").get<int>();
    if (j.contains("master_seed")) cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("jobs")) cfg.jobs = j.at("jobs").get<int>();
    if (j.contains("observed_columns")) {
      cfg.observed_columns = normalize_columns(j.at("observed_columns").get<std::vector<int>>());
    }
    if (j.contains("comparisons")) {
      for (const auto& pair : j.at("comparisons")) {
        auto v = pair.get<std::vector<std::string>>();
        if (v.size() != 2) throw ConfigError("config: comparisons entries must be pairs");
        cfg.comparisons.emplace_back(v[0], v[1]);
      }
    }
    if (j.contains("feature_propagation")) {
      const auto& fp = j.at("feature_propagation");
      if (fp.contains("max_iters")) cfg.imputer_config.max_iters = fp.at("max_iters").get<int>();
      if (fp.contains("convergence_tol")) {
        cfg.imputer_config.convergence_tol = fp.at("convergence_tol").get<double>();
      }
    }
    if (j.contains("plugin_timeout_sec")) {
      cfg.imputer_config.plugin_timeout_sec = j.at("plugin_timeout_sec").get<double>();
    }
    if (j.contains("density_features")) {
      cfg.density_features = j.at("density_features").get<std::vector<int>>();
    }
    if (j.contains("density_grid")) cfg.density_grid = j.at("density_grid").get<std::size_t>();
    if (j.contains("emit_masks")) cfg.emit_masks = j.at("emit_masks").get<bool>();
  } catch (const json::exception& e) {
    throw ConfigError("config: " + std::string(e.what()));
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_string(text);
}

namespace {

struct TupleKey {
  std::size_t dataset = 0;
  std::size_t mechanism = 0;
  std::size_t rate = 0;
  int repetition = 0;
  std::uint64_t seed = 0;
};

std::string tuple_filename(const TupleKey& t) {
  return "t" + std::to_string(t.dataset) + "_" + std::to_string(t.mechanism) + "_" +
         std::to_string(t.rate) + "_" + std::to_string(t.repetition) + ".json";
}

std::string rate_tag(double p) {
  std::string s = format_double(p * 100.0);
  std::replace(s.begin(), s.end(), '.', '_');
  return s;
}

struct Context {
  ExperimentConfig config;
  fs::path out;
  fs::path tuples_dir;
  fs::path masks_dir;
  std::vector<AttributedGraph> graphs;
  std::vector<TupleKey> tuples;
  std::vector<std::pair<std::string, std::string>> comparisons;
};

Context prepare(const ExperimentConfig& config) {
  config.validate();
  Context ctx{config, fs::path(config.output_dir), {}, {}, {}, {}, {}};
  ctx.tuples_dir = ctx.out / "tuples";
  ctx.masks_dir = ctx.out / "masks";
  ctx.comparisons = config.resolved_comparisons();

  for (const auto& ds : config.datasets) {
    if (ds.synth) {
      auto g = generate_sbm(*ds.synth);
      ctx.graphs.push_back(std::move(g));
    } else {
      ctx.graphs.push_back(load_graph(ds.path));
    }
    for (int col : config.density_features) {
      if (col < 0 || col >= static_cast<int>(ctx.graphs.back().num_features())) {
        throw ConfigError("config: density feature column " + std::to_string(col) +
                          " out of range for dataset \"" + ds.display_name() + "\"");
      }
    }
  }

  for (std::size_t di = 0; di < config.datasets.size(); ++di) {
    for (std::size_t mi = 0; mi < config.mechanisms.size(); ++mi) {
      for (std::size_t ri = 0; ri < config.p_miss.size(); ++ri) {
        for (int rep = 0; rep < config.repetitions; ++rep) {
          TupleKey key{di, mi, ri, rep,
                       derive_seed(config.master_seed,
                                   {di, mi, ri, static_cast<std::uint64_t>(rep)})};
          ctx.tuples.push_back(key);
        }
      }
    }
  }
  return ctx;
}

MechanismSpec make_spec(const ExperimentConfig& config, const MechanismConfig& mech,
                        double p, std::uint64_t seed) {
  MechanismSpec spec;
  spec.kind = mech.kind;
  spec.p_miss = p;
  spec.hops = mech.hops.value_or(1);
  spec.omega = mech.omega.value_or(3.0);
  spec.sign = mech.sign;
  spec.column_split.observed_columns = mech.observed_columns.value_or(config.observed_columns);
  spec.g_weights = mech.g_weights;
  spec.a_mar_column = mech.a_mar_column;
  spec.seed = seed;
  return spec;
}

ImputationResult run_imputer(const std::string& imputer, const AttributedGraph& g,
                             const Mask& mask, const ImputerConfig& icfg) {
  if (imputer == "tabular_mean") return impute_tabular_mean(g.features(), mask);
  if (imputer == "graph_average") return impute_graph_average(g, g.features(), mask);
  if (imputer == "feature_propagation") {
    return impute_feature_propagation(g, g.features(), mask, icfg);
  }
  if (imputer.rfind("external:", 0) == 0) {
    return run_external_imputer(imputer.substr(9), g, g.features(), mask, icfg);
  }
  throw ConfigError("unknown imputer \"" + imputer + "\"");
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write " + tmp.string());
    out << text;
  }
  fs::rename(tmp, path);
}

/// Computes one tuple and writes its JSON file. Returns the file content.
ordered_json compute_tuple(const Context& ctx, const TupleKey& key) {
  const ExperimentConfig& cfg = ctx.config;
  const AttributedGraph& g = ctx.graphs[key.dataset];
  const MechanismConfig& mech = cfg.mechanisms[key.mechanism];
  const double p = cfg.p_miss[key.rate];

  MechanismSpec spec = make_spec(cfg, mech, p, key.seed);
  Mask mask = generate_mask(g, spec);
  if (cfg.emit_masks) {
    fs::create_directories(ctx.masks_dir);
    const std::string stem = "m" + std::to_string(key.dataset) + "_" +
                             std::to_string(key.mechanism) + "_" + std::to_string(key.rate) +
                             "_" + std::to_string(key.repetition) + ".gamm";
    write_mask(mask, ctx.masks_dir / stem);
  }

  ordered_json t;
  t["dataset"] = cfg.datasets[key.dataset].display_name();
  t["dataset_index"] = key.dataset;
  t["mechanism"] = to_string(mech.kind);
  t["mechanism_index"] = key.mechanism;
  t["p_miss"] = p;
  t["rate_index"] = key.rate;
  t["repetition"] = key.repetition;
  t["seed"] = key.seed;
  {
    json prov = json::parse(mask.provenance);
    t["calibration"] = prov.at("calibration");
  }
  t["empirical_rate"] = empirical_rate(mask);

  const bool want_density = !cfg.density_features.empty() && key.rate == 0;
  ordered_json imputers_json = ordered_json::array();
  ordered_json density_json;
  for (const std::string& name : cfg.imputers) {
    ImputationResult res = run_imputer(name, g, mask, cfg.imputer_config);
    MaeRmse err = masked_mae_rmse(g.features(), res.imputed, mask);
    ordered_json ij;
    ij["name"] = name;
    ij["mae"] = err.mae;
    ij["rmse"] = err.rmse;
    ij["missing_entries"] = err.missing_entries;
    ij["iterations"] = res.iterations;
    ij["wall_ms"] = res.wall_ms;
    if (!res.zero_filled_columns.empty()) ij["zero_filled_columns"] = res.zero_filled_columns;
    if (res.neighbor_fallbacks > 0) ij["neighbor_fallbacks"] = res.neighbor_fallbacks;
    if (res.unreached_entries > 0) ij["unreached_entries"] = res.unreached_entries;
    imputers_json.push_back(std::move(ij));

    if (want_density) {
      ordered_json cols;
      for (int col : cfg.density_features) {
        std::vector<double> column(g.num_nodes());
        for (std::size_t i = 0; i < g.num_nodes(); ++i) {
          column[i] = res.imputed(i, static_cast<std::size_t>(col));
        }
        cols[std::to_string(col)] = column;
      }
      density_json[name] = std::move(cols);
    }
  }
  t["imputers"] = std::move(imputers_json);
  if (want_density) t["density_columns"] = std::move(density_json);
  return t;
}

struct Assembled {
  std::vector<MetricSample> samples;
  ordered_json mask_rows = ordered_json::array();
  ordered_json failures = ordered_json::array();
  // (dataset_index, mechanism_index, imputer) -> column -> pooled values
  std::map<std::tuple<std::size_t, std::size_t, std::string>,
           std::map<int, std::vector<double>>>
      density;
  int failed_tuples = 0;
};

Assembled assemble(const Context& ctx) {
  Assembled out;
  auto record_failure = [&out](const TupleKey& key, const std::string& message) {
    ordered_json f;
    f["tuple"] = tuple_filename(key);
    f["error"] = message;
    out.failures.push_back(std::move(f));
    ++out.failed_tuples;
  };
  for (const TupleKey& key : ctx.tuples) {
    const fs::path path = ctx.tuples_dir / tuple_filename(key);
    json t;
    std::string problem;
    if (!fs::exists(path)) {
      problem = "tuple file missing";
    } else {
      try {
        std::ifstream in(path);
        in >> t;
        if (t.contains("error")) {
          problem = t.at("error").get<std::string>();
        } else if (t.at("seed").get<std::uint64_t>() != key.seed) {
          problem = "seed mismatch (stale tuple file)";
        }
      } catch (const std::exception& e) {
        problem = std::string("unreadable tuple file: ") + e.what();
      }
    }
    if (!problem.empty()) {
      record_failure(key, problem);
      continue;
    }

    ordered_json mrow;
    mrow["dataset"] = t.at("dataset").get<std::string>();
    mrow["mechanism"] = t.at("mechanism").get<std::string>();
    mrow["p_miss"] = t.at("p_miss").get<double>();
    mrow["repetition"] = t.at("repetition").get<int>();
    mrow["seed"] = key.seed;
    mrow["bias"] = t.at("calibration").at("bias").get<double>();
    mrow["achieved_expected_rate"] =
        t.at("calibration").at("achieved_expected_rate").get<double>();
    mrow["empirical_rate"] = t.at("empirical_rate").get<double>();
    out.mask_rows.push_back(std::move(mrow));

    for (const auto& ij : t.at("imputers")) {
      MetricSample s;
      s.dataset = t.at("dataset").get<std::string>();
      s.mechanism = t.at("mechanism").get<std::string>();
      s.p_miss = t.at("p_miss").get<double>();
      s.imputer = ij.at("name").get<std::string>();
      s.repetition = t.at("repetition").get<int>();
      s.seed = key.seed;
      s.mae = ij.at("mae").get<double>();
      s.rmse = ij.at("rmse").get<double>();
      out.samples.push_back(std::move(s));
    }

    if (t.contains("density_columns")) {
      for (const auto& [imputer, cols] : t.at("density_columns").items()) {
        for (const auto& [col_str, values] : cols.items()) {
          auto& pool = out.density[{key.dataset, key.mechanism, imputer}]
                                  [std::stoi(col_str)];
          for (const auto& v : values) pool.push_back(v.get<double>());
        }
      }
    }
  }
  return out;
}

void write_density_exports(const Context& ctx, const Assembled& assembled) {
  const ExperimentConfig& cfg = ctx.config;
  if (cfg.density_features.empty()) return;
  for (std::size_t di = 0; di < cfg.datasets.size(); ++di) {
    const AttributedGraph& g = ctx.graphs[di];
    for (std::size_t mi = 0; mi < cfg.mechanisms.size(); ++mi) {
      const std::string mech_name = to_string(cfg.mechanisms[mi].kind);
      for (int col : cfg.density_features) {
        // Sources: the true column plus one pooled column per imputer.
        std::vector<double> truth(g.num_nodes());
        for (std::size_t i = 0; i < g.num_nodes(); ++i) {
          truth[i] = g.features()(i, static_cast<std::size_t>(col));
        }
        std::vector<std::pair<std::string, const std::vector<double>*>> sources;
        sources.emplace_back("truth", &truth);
        bool any = false;
        for (const std::string& imputer : cfg.imputers) {
          auto it = assembled.density.find({di, mi, imputer});
          if (it == assembled.density.end()) continue;
          auto cit = it->second.find(col);
          if (cit == it->second.end() || cit->second.empty()) continue;
          sources.emplace_back(imputer, &cit->second);
          any = true;
        }
        if (!any) continue;

        // Shared grid covering every source's own +-3h span.
        double lo = 0.0;
        double hi = 0.0;
        bool first = true;
        for (const auto& [name, values] : sources) {
          const double h = silverman_bandwidth(*values);
          const auto [mn, mx] = std::minmax_element(values->begin(), values->end());
          const double slo = *mn - 3.0 * h;
          const double shi = *mx + 3.0 * h;
          if (first || slo < lo) lo = slo;
          if (first || shi > hi) hi = shi;
          first = false;
        }
        std::vector<double> grid(cfg.density_grid);
        const double step = (hi - lo) / static_cast<double>(cfg.density_grid - 1);
        for (std::size_t i = 0; i < grid.size(); ++i) {
          grid[i] = lo + step * static_cast<double>(i);
        }

        std::vector<DensityExport> exports;
        exports.reserve(sources.size());
        for (const auto& [name, values] : sources) {
          exports.push_back(kde_on_grid(*values, grid));
        }

        const fs::path dir = ctx.out / "density" / cfg.datasets[di].display_name() / mech_name;
        fs::create_directories(dir);
        std::string csv = "x";
        for (const auto& [name, values] : sources) {
          csv += "," + (name == "truth" ? std::string("truth_density") : name);
        }
        csv += "\n";
        for (std::size_t r = 0; r < grid.size(); ++r) {
          csv += format_double(grid[r]);
          for (const auto& e : exports) csv += "," + format_double(e.density[r]);
          csv += "\n";
        }
        write_text_atomic(dir / (std::to_string(col) + ".csv"), csv);
      }
    }
  }
}

RunResult finalize(const Context& ctx, const Assembled& assembled) {
  const ExperimentConfig& cfg = ctx.config;

  // Comparison tables, one per (family, rate).
  std::vector<ComparisonTable> tables;
  for (const auto& [ref, neu] : ctx.comparisons) {
    for (double p : cfg.p_miss) {
      tables.push_back(build_comparison_table(assembled.samples, ref, neu, p));
    }
  }

  fs::create_directories(ctx.out / "tables");
  for (const ComparisonTable& t : tables) {
    std::string csv = "imputer,dataset,degradation_pct,p_value,significant\n";
    for (const ComparisonCell& c : t.cells) {
      csv += c.imputer + "," + c.dataset + "," + format_double(c.degradation_pct) + "," +
             format_double(c.p_value) + "," + (c.significant ? "1" : "0") + "\n";
    }
    const std::string fname = t.mech_ref + "_vs_" + t.mech_new + "_p" + rate_tag(t.p_miss) +
                              ".csv";
    write_text_atomic(ctx.out / "tables" / fname, csv);
  }

  write_density_exports(ctx, assembled);

  ordered_json report;
  report["schema_version"] = 1;
  report["config"] = json::parse(cfg.to_json_string());
  report["grid"] = {{"datasets", cfg.datasets.size()},
                    {"mechanisms", cfg.mechanisms.size()},
                    {"rates", cfg.p_miss.size()},
                    {"imputers", cfg.imputers.size()},
                    {"repetitions", cfg.repetitions},
                    {"tuples", ctx.tuples.size()}};
  ordered_json samples = ordered_json::array();
  for (const MetricSample& s : assembled.samples) {
    ordered_json row;
    row["dataset"] = s.dataset;
    row["mechanism"] = s.mechanism;
    row["p_miss"] = s.p_miss;
    row["imputer"] = s.imputer;
    row["repetition"] = s.repetition;
    row["seed"] = s.seed;
    row["mae"] = s.mae;
    row["rmse"] = s.rmse;
    samples.push_back(std::move(row));
  }
  report["samples"] = std::move(samples);
  report["masks"] = assembled.mask_rows;

  ordered_json comparisons = ordered_json::array();
  std::map<std::string, std::vector<ComparisonTable>> by_family;
  for (const ComparisonTable& t : tables) {
    ordered_json tj;
    tj["mech_ref"] = t.mech_ref;
    tj["mech_new"] = t.mech_new;
    tj["p_miss"] = t.p_miss;
    ordered_json cells = ordered_json::array();
    for (const ComparisonCell& c : t.cells) {
      ordered_json cj;
      cj["imputer"] = c.imputer;
      cj["dataset"] = c.dataset;
      cj["degradation_pct"] = c.degradation_pct;
      cj["u_statistic"] = c.u_statistic;
      cj["p_value"] = c.p_value;
      cj["significant"] = c.significant;
      cj["direction"] = to_string(c.direction);
      cells.push_back(std::move(cj));
    }
    tj["cells"] = std::move(cells);
    tj["summary"] = {{"degradation", t.summary.degradation},
                     {"no_change", t.summary.no_change},
                     {"improvement", t.summary.improvement}};
    tj["missing_cells"] = t.missing_cells;
    comparisons.push_back(std::move(tj));
    by_family[t.summary.family].push_back(t);
  }
  report["comparisons"] = std::move(comparisons);

  auto summary_json = [](const OutcomeSummary& s) {
    ordered_json j;
    j["family"] = s.family;
    j["degradation"] = s.degradation;
    j["no_change"] = s.no_change;
    j["improvement"] = s.improvement;
    j["pct_degradation"] = s.pct(s.degradation);
    j["pct_no_change"] = s.pct(s.no_change);
    j["pct_improvement"] = s.pct(s.improvement);
    return j;
  };
  ordered_json family_summaries = ordered_json::array();
  std::vector<ComparisonTable> all_tables;
  for (const auto& [family, ts] : by_family) {
    family_summaries.push_back(summary_json(summarize(ts, family)));
    all_tables.insert(all_tables.end(), ts.begin(), ts.end());
  }
  report["family_summaries"] = std::move(family_summaries);
  report["overall_summary"] = summary_json(summarize(all_tables, "overall"));
  report["failures"] = assembled.failures;

  const fs::path report_path = ctx.out / "report.json";
  write_text_atomic(report_path, report.dump(2) + "\n");

  RunResult result;
  result.tuples_total = static_cast<int>(ctx.tuples.size());
  result.tuples_failed = assembled.failed_tuples;
  result.report_path = report_path;
  return result;
}

void write_manifest(const Context& ctx) {
  ordered_json m;
  m["schema_version"] = 1;
  m["config"] = json::parse(ctx.config.to_json_string());
  m["master_seed"] = ctx.config.master_seed;
  m["tuple_count"] = ctx.tuples.size();
  ordered_json rows = ordered_json::array();
  for (const TupleKey& t : ctx.tuples) {
    ordered_json row;
    row["dataset"] = ctx.config.datasets[t.dataset].display_name();
    row["mechanism"] = to_string(ctx.config.mechanisms[t.mechanism].kind);
    row["p_miss"] = ctx.config.p_miss[t.rate];
    row["repetition"] = t.repetition;
    row["seed"] = t.seed;
    row["file"] = "tuples/" + tuple_filename(t);
    rows.push_back(std::move(row));
  }
  m["tuples"] = std::move(rows);
  write_text_atomic(ctx.out / "manifest.json", m.dump(2) + "\n");
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config) {
  Context ctx = prepare(config);
  fs::create_directories(ctx.tuples_dir);
  write_manifest(ctx);
  log_info("sweep: " + std::to_string(ctx.tuples.size()) + " tuples (" +
           std::to_string(config.datasets.size()) + " datasets x " +
           std::to_string(config.mechanisms.size()) + " mechanisms x " +
           std::to_string(config.p_miss.size()) + " rates x " +
           std::to_string(config.repetitions) + " reps), " + std::to_string(config.jobs) +
           " workers");

  std::atomic<std::size_t> cursor{0};
  std::mutex log_mu;
  auto worker = [&] {
    while (true) {
      const std::size_t index = cursor.fetch_add(1);
      if (index >= ctx.tuples.size()) break;
      const TupleKey& key = ctx.tuples[index];
      const fs::path path = ctx.tuples_dir / tuple_filename(key);

      if (fs::exists(path)) {
        // Resume: trust an existing tuple file when its seed matches.
        try {
          json t;
          std::ifstream in(path);
          in >> t;
          if (t.contains("seed") && t.at("seed").get<std::uint64_t>() == key.seed &&
              !t.contains("error")) {
            continue;
          }
        } catch (const std::exception&) {
          // fall through and recompute
        }
      }

      try {
        ordered_json t = compute_tuple(ctx, key);
        write_text_atomic(path, t.dump(2) + "\n");
      } catch (const std::exception& e) {
        ordered_json t;
        t["seed"] = key.seed;
        t["error"] = e.what();
        write_text_atomic(path, t.dump(2) + "\n");
        std::lock_guard<std::mutex> lock(log_mu);
        log_error("tuple " + tuple_filename(key) + " failed: " + e.what());
      }
    }
  };

  const int jobs = std::max(1, std::min(config.jobs, static_cast<int>(ctx.tuples.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  Assembled assembled = assemble(ctx);
  return finalize(ctx, assembled);
}

RunResult rebuild_report(const fs::path& output_dir) {
  const fs::path manifest_path = output_dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw DataError("no manifest.json in " + output_dir.string());
  json m;
  try {
    in >> m;
  } catch (const json::exception& e) {
    throw DataError("manifest.json: " + std::string(e.what()));
  }
  ExperimentConfig config = ExperimentConfig::from_json_string(m.at("config").dump());
  config.output_dir = output_dir.string();
  Context ctx = prepare(config);
  Assembled assembled = assemble(ctx);
  return finalize(ctx, assembled);
}

}  // namespace gamm
