#pragma once

#include <cstdint>
#include <string>

#include "gamm/graph.hpp"

namespace gamm {

/// Stochastic-block-model generator with per-column Gaussian features.
/// Labels are the block ids; homophily is dialed through p_in / p_out
/// (p_out > p_in gives heterophilic graphs).
struct SynthSpec {
  std::size_t num_nodes = 0;
  int num_blocks = 2;
  double p_in = 0.1;
  double p_out = 0.01;
  double mu_gap = 1.0;     // spread between class prototype levels per column
  int num_features = 4;
  double noise_sd = 0.1;
  std::uint64_t seed = 0;
  std::string name = "synth";

  void validate() const;
  std::string to_json_string() const;
  static SynthSpec from_json_string(const std::string& json_text);
};

/// Class prototype for (class, column): mu_gap * ((class + column) mod K)
/// / (K - 1). The rotation gives every column its own class ordering while
/// keeping columns mutually independent given the labels.
double class_prototype(const SynthSpec& spec, int cls, int col);

/// Feature column j of node i is Normal(prototype(label_i, j), noise_sd^2),
/// drawn independently per entry; deterministic under spec.seed.
AttributedGraph generate_sbm(const SynthSpec& spec);

struct IndependenceCheck {
  double max_abs_corr = 0.0;
  bool constant_column = false;  // some column had zero pooled variance
};

/// Maximum absolute off-diagonal Pearson correlation between feature
/// columns, using pooled within-class moments (class-conditional
/// independence is the generative guarantee). Constant columns contribute
/// correlation 0 and set the flag.
IndependenceCheck column_independence_check(const AttributedGraph& g);

}  // namespace gamm
