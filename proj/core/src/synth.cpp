#include "gamm/synth.hpp"

#include <cmath>
#include <vector>

#include <nlohmann/json.hpp>

#include "gamm/error.hpp"
#include "gamm/rng.hpp"

namespace gamm {

void SynthSpec::validate() const {
  if (num_nodes < 2) throw ConfigError("synth: num_nodes must be >= 2");
  if (num_blocks < 2) throw ConfigError("synth: num_blocks must be >= 2");
  if (static_cast<std::size_t>(num_blocks) > num_nodes) {
    throw ConfigError("synth: more blocks than nodes");
  }
  if (p_in < 0.0 || p_in > 1.0 || p_out < 0.0 || p_out > 1.0) {
    throw ConfigError("synth: edge probabilities must lie in [0, 1]");
  }
  if (num_features < 1) throw ConfigError("synth: num_features must be >= 1");
  if (noise_sd < 0.0) throw ConfigError("synth: noise_sd must be >= 0");
}

double class_prototype(const SynthSpec& spec, int cls, int col) {
  const int k = spec.num_blocks;
  return spec.mu_gap * static_cast<double>((cls + col) % k) / static_cast<double>(k - 1);
}

AttributedGraph generate_sbm(const SynthSpec& spec) {
  spec.validate();
  const std::size_t n = spec.num_nodes;
  const int k = spec.num_blocks;

  // Contiguous balanced block assignment: block b holds nodes
  // [b*n/K, (b+1)*n/K).
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = static_cast<int>((i * static_cast<std::size_t>(k)) / n);
  }

  auto edge_eng = make_engine(derive_seed(spec.seed, {0}));
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double p = labels[i] == labels[j] ? spec.p_in : spec.p_out;
      if (uniform01(edge_eng) < p) {
        edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
      }
    }
  }

  auto feat_eng = make_engine(derive_seed(spec.seed, {1}));
  Matrix features(n, static_cast<std::size_t>(spec.num_features));
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (int j = 0; j < spec.num_features; ++j) {
      double v = class_prototype(spec, labels[i], j);
      if (spec.noise_sd > 0.0) v += spec.noise_sd * noise(feat_eng);
      features(i, static_cast<std::size_t>(j)) = v;
    }
  }

  return AttributedGraph::build(spec.name, n, std::move(edges), std::move(features),
                                std::move(labels));
}

IndependenceCheck column_independence_check(const AttributedGraph& g) {
  const Matrix& f = g.features();
  const std::size_t n = f.rows();
  const std::size_t d = f.cols();
  if (d < 2) throw Error("column_independence_check requires d >= 2");

  // Pooled within-class moments; without labels everything is one class.
  std::vector<int> labels(n, 0);
  int num_classes = 1;
  if (g.labels()) {
    labels = *g.labels();
    for (int c : labels) num_classes = std::max(num_classes, c + 1);
  }

  std::vector<std::vector<double>> class_mean(
      static_cast<std::size_t>(num_classes), std::vector<double>(d, 0.0));
  std::vector<std::size_t> class_count(static_cast<std::size_t>(num_classes), 0);
  for (std::size_t i = 0; i < n; ++i) {
    auto c = static_cast<std::size_t>(labels[i]);
    ++class_count[c];
    for (std::size_t j = 0; j < d; ++j) class_mean[c][j] += f(i, j);
  }
  for (std::size_t c = 0; c < class_mean.size(); ++c) {
    if (class_count[c] == 0) continue;
    for (std::size_t j = 0; j < d; ++j) {
      class_mean[c][j] /= static_cast<double>(class_count[c]);
    }
  }

  // Pooled centered cross-products.
  std::vector<double> cov(d * d, 0.0);
  std::vector<double> centered(d);
  for (std::size_t i = 0; i < n; ++i) {
    auto c = static_cast<std::size_t>(labels[i]);
    for (std::size_t j = 0; j < d; ++j) centered[j] = f(i, j) - class_mean[c][j];
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = a; b < d; ++b) {
        cov[a * d + b] += centered[a] * centered[b];
      }
    }
  }

  IndependenceCheck out;
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a + 1; b < d; ++b) {
      const double va = cov[a * d + a];
      const double vb = cov[b * d + b];
      if (va <= 0.0 || vb <= 0.0) {
        out.constant_column = true;
        continue;  // correlation with a constant column is defined as 0
      }
      const double corr = cov[a * d + b] / std::sqrt(va * vb);
      out.max_abs_corr = std::max(out.max_abs_corr, std::abs(corr));
    }
  }
  return out;
}

std::string SynthSpec::to_json_string() const {
  nlohmann::ordered_json j;
  j["num_nodes"] = num_nodes;
  j["num_blocks"] = num_blocks;
  j["p_in"] = p_in;
  j["p_out"] = p_out;
  j["mu_gap"] = mu_gap;
  j["num_features"] = num_features;
  j["noise_sd"] = noise_sd;
  j["seed"] = seed;
  j["name"] = name;
  return j.dump();
}

SynthSpec SynthSpec::from_json_string(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("synth spec is not valid JSON: " + std::string(e.what()));
  }
  static const char* known[] = {"num_nodes", "num_blocks", "p_in",     "p_out", "mu_gap",
                                "num_features", "noise_sd", "seed", "name"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || (it.key() == k);
    if (!ok) throw ConfigError("synth spec: unknown key \"" + it.key() + "\"");
  }
  SynthSpec spec;
  try {
    if (j.contains("num_nodes")) spec.num_nodes = j.at("num_nodes").get<std::size_t>();
    if (j.contains("num_blocks")) spec.num_blocks = j.at("num_blocks").get<int>();
    if (j.contains("p_in")) spec.p_in = j.at("p_in").get<double>();
    if (j.contains("p_out")) spec.p_out = j.at("p_out").get<double>();
    if (j.contains("mu_gap")) spec.mu_gap = j.at("mu_gap").get<double>();
    if (j.contains("num_features")) spec.num_features = j.at("num_features").get<int>();
    if (j.contains("noise_sd")) spec.noise_sd = j.at("noise_sd").get<double>();
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("name")) spec.name = j.at("name").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("synth spec: " + std::string(e.what()));
  }
  spec.validate();
  return spec;
}

}  // namespace gamm
