// Acceptance suite: every check prints one PASS/FAIL line (SKIP when an
// optional external dataset is absent) and the process exits nonzero if any
// check fails. Run through ctest or directly; GAMM_CORA_DIR points the
// homophily check at a real Cora directory when one is available.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "gamm/experiment.hpp"
#include "gamm/graph_io.hpp"
#include "gamm/imputers.hpp"
#include "gamm/kde.hpp"
#include "gamm/mann_whitney.hpp"
#include "gamm/mask.hpp"
#include "gamm/mechanism.hpp"
#include "gamm/metrics.hpp"
#include "gamm/report.hpp"
#include "gamm/rng.hpp"
#include "gamm/synth.hpp"

using namespace gamm;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report_line(const char* status, const std::string& name, const std::string& detail) {
  std::printf("[%s] %s%s%s\n", status, name.c_str(), detail.empty() ? "" : ": ",
              detail.c_str());
  std::fflush(stdout);
}

void check(bool ok, const std::string& name, const std::string& detail) {
  if (!ok) ++g_failures;
  report_line(ok ? "PASS" : "FAIL", name, detail);
}

void skip(const std::string& name, const std::string& reason) {
  report_line("SKIP", name, reason);
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

AttributedGraph acceptance_graph() {
  SynthSpec s;
  s.num_nodes = 1000;
  s.num_blocks = 4;
  s.p_in = 0.05;
  s.p_out = 0.01;
  s.mu_gap = 1.0;
  s.num_features = 6;
  s.noise_sd = 0.5;
  s.seed = 20250811;
  s.name = "acceptance";
  return generate_sbm(s);
}

// --- criterion 1: calibration exactness and speed -------------------------

void criterion_calibration() {
  auto g = acceptance_graph();
  auto profile = structural_profile(g);
  double worst_gap = 0.0;
  double worst_time = 0.0;
  bool ok = true;
  for (MechanismKind kind :
       {MechanismKind::MCAR, MechanismKind::A_MAR, MechanismKind::A_MNAR, MechanismKind::S_MAR,
        MechanismKind::N_MAR, MechanismKind::N_MNAR, MechanismKind::G_MAR,
        MechanismKind::G_MNAR}) {
    for (double p : {0.2, 0.5, 0.8}) {
      MechanismSpec spec;
      spec.kind = kind;
      spec.p_miss = p;
      spec.column_split.observed_columns = {0};
      spec.seed = 1;
      const auto t0 = Clock::now();
      auto driver = build_driver(g, profile, spec);
      auto calib = calibrate_bias(driver, spec);
      const double secs = seconds_since(t0);
      worst_time = std::max(worst_time, secs);
      worst_gap = std::max(worst_gap, std::abs(calib.achieved_expected_rate - p));
      ok = ok && std::abs(calib.achieved_expected_rate - p) <= 1e-9 && secs < 5.0;
    }
  }
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "8 kinds x 3 rates on 1000 nodes; max |E[rate]-p| = %.3g, max time %.2fs",
                worst_gap, worst_time);
  check(ok, "1 calibration exactness", detail);
}

// --- criterion 2: sampling concentration ----------------------------------

void criterion_concentration() {
  SynthSpec s;
  s.num_nodes = 10'000;
  s.p_in = 0.0;
  s.p_out = 0.0;
  s.num_features = 10;
  s.seed = 2;
  auto g = generate_sbm(s);  // 100,000 missable entries
  const double p = 0.5;
  int within = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    MechanismSpec spec;
    spec.kind = MechanismKind::MCAR;
    spec.p_miss = p;
    spec.seed = seed;
    auto mask = generate_mask(g, spec);
    if (std::abs(empirical_rate(mask) - p) <= 0.01) ++within;
  }
  char detail[120];
  std::snprintf(detail, sizeof(detail), "%d/100 seeds within +-0.01 on 1e5 entries", within);
  check(within >= 99, "2 sampling concentration", detail);
}

// --- criterion 3: mechanism signatures -------------------------------------

std::vector<std::size_t> degree_order(const AttributedGraph& g) {
  std::vector<std::size_t> order(g.num_nodes());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return g.degree(static_cast<NodeId>(a)) < g.degree(static_cast<NodeId>(b));
  });
  return order;
}

void criterion_signatures() {
  auto g = acceptance_graph();
  const std::size_t n = g.num_nodes();
  const std::size_t d = g.num_features();
  const std::size_t third = n / 3;
  auto order = degree_order(g);

  // (a) MCAR independence from degree terciles (chi-square, df=2, alpha=.01).
  constexpr double kChi2Crit = 9.210340371976182;
  int independent = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    MechanismSpec spec;
    spec.kind = MechanismKind::MCAR;
    spec.p_miss = 0.3;
    spec.seed = 1000 + seed;
    auto mask = generate_mask(g, spec);
    double missing[3] = {0, 0, 0};
    double total[3] = {0, 0, 0};
    for (int t = 0; t < 3; ++t) {
      const std::size_t begin = t * third;
      const std::size_t end = t == 2 ? n : begin + third;
      for (std::size_t idx = begin; idx < end; ++idx) {
        for (std::size_t j = 0; j < d; ++j) {
          total[t] += 1;
          missing[t] += mask.observed(order[idx], j) ? 0 : 1;
        }
      }
    }
    const double pooled = (missing[0] + missing[1] + missing[2]) /
                          (total[0] + total[1] + total[2]);
    double chi2 = 0.0;
    for (int t = 0; t < 3; ++t) {
      const double e_miss = total[t] * pooled;
      const double e_obs = total[t] * (1 - pooled);
      chi2 += (missing[t] - e_miss) * (missing[t] - e_miss) / e_miss;
      chi2 += ((total[t] - missing[t]) - e_obs) * ((total[t] - missing[t]) - e_obs) / e_obs;
    }
    if (chi2 <= kChi2Crit) ++independent;
  }
  char detail_a[120];
  std::snprintf(detail_a, sizeof(detail_a), "%d/100 seeds fail to reject at alpha=0.01",
                independent);
  check(independent >= 95, "3a MCAR degree independence", detail_a);

  // (b) S-MAR negative hits low-degree nodes hardest.
  {
    MechanismSpec spec;
    spec.kind = MechanismKind::S_MAR;
    spec.p_miss = 0.3;
    spec.omega = 3.0;
    spec.seed = 31;
    auto mask = generate_mask(g, spec);
    auto tercile_rate = [&](std::size_t begin, std::size_t end) {
      double miss = 0, tot = 0;
      for (std::size_t idx = begin; idx < end; ++idx) {
        for (std::size_t j = 0; j < d; ++j) {
          tot += 1;
          miss += mask.observed(order[idx], j) ? 0 : 1;
        }
      }
      return miss / tot;
    };
    const double low = tercile_rate(0, third);
    const double high = tercile_rate(n - third, n);
    char detail[120];
    std::snprintf(detail, sizeof(detail), "low tercile %.3f vs high %.3f (gap %.3f)", low,
                  high, low - high);
    check(low > high + 0.05, "3b S-MAR degree direction", detail);
  }

  // (c) A-MNAR positive hits above-median values hardest.
  {
    MechanismSpec spec;
    spec.kind = MechanismKind::A_MNAR;
    spec.p_miss = 0.3;
    spec.sign = Sign::positive;
    spec.seed = 32;
    auto mask = generate_mask(g, spec);
    double miss_above = 0, tot_above = 0, miss_below = 0, tot_below = 0;
    for (std::size_t j = 0; j < d; ++j) {
      std::vector<double> column(n);
      for (std::size_t i = 0; i < n; ++i) column[i] = g.features()(i, j);
      auto sorted = column;
      std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
      const double median = sorted[n / 2];
      for (std::size_t i = 0; i < n; ++i) {
        if (column[i] > median) {
          tot_above += 1;
          miss_above += mask.observed(i, j) ? 0 : 1;
        } else if (column[i] < median) {
          tot_below += 1;
          miss_below += mask.observed(i, j) ? 0 : 1;
        }
      }
    }
    const double above = miss_above / tot_above;
    const double below = miss_below / tot_below;
    char detail[120];
    std::snprintf(detail, sizeof(detail), "above-median rate %.3f vs below %.3f", above, below);
    check(above >= below + 0.05, "3c A-MNAR self-dependence", detail);
  }

  // (d) N-MNAR on a perfectly homophilic noiseless SBM separates blocks
  // consistently with the block means.
  {
    SynthSpec s;
    s.num_nodes = 1000;
    s.num_blocks = 2;
    s.p_in = 0.05;
    s.p_out = 0.0;
    s.mu_gap = 1.0;
    s.num_features = 2;
    s.noise_sd = 0.0;
    s.seed = 33;
    auto hg = generate_sbm(s);
    MechanismSpec spec;
    spec.kind = MechanismKind::N_MNAR;
    spec.p_miss = 0.4;
    spec.sign = Sign::positive;
    spec.seed = 34;
    auto mask = generate_mask(hg, spec);
    const auto& labels = *hg.labels();
    bool consistent = true;
    double min_gap = 1.0;
    for (int j = 0; j < s.num_features; ++j) {
      double miss[2] = {0, 0};
      double tot[2] = {0, 0};
      for (std::size_t i = 0; i < hg.num_nodes(); ++i) {
        const int b = labels[i];
        tot[b] += 1;
        miss[b] += mask.observed(i, static_cast<std::size_t>(j)) ? 0 : 1;
      }
      const double rate0 = miss[0] / tot[0];
      const double rate1 = miss[1] / tot[1];
      const double proto0 = class_prototype(s, 0, j);
      const double proto1 = class_prototype(s, 1, j);
      const bool right_way = proto0 > proto1 ? rate0 > rate1 : rate1 > rate0;
      consistent = consistent && right_way;
      min_gap = std::min(min_gap, std::abs(rate0 - rate1));
    }
    char detail[120];
    std::snprintf(detail, sizeof(detail),
                  "per-block rates ordered with block means in both columns (min gap %.3f)",
                  min_gap);
    check(consistent, "3d N-MNAR block separation", detail);
  }
}

// --- criterion 4: exact U test against brute-force enumeration -------------

// Enumerates every C(n1+n2, n1) index subset explicitly; independent of the
// library's count-by-rank-sum dynamic program.
double brute_force_mwu_p(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::size_t n = pooled.size();
  const std::size_t n1 = a.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return pooled[x] < pooled[y]; });
  std::vector<long long> dr(n);
  for (std::size_t p = 0; p < n;) {
    std::size_t q = p;
    while (q + 1 < n && pooled[order[q + 1]] == pooled[order[p]]) ++q;
    for (std::size_t i = p; i <= q; ++i) dr[order[i]] = static_cast<long long>(p + q + 2);
    p = q + 1;
  }
  auto doubled_u = [&](const std::vector<std::size_t>& subset) {
    long long sum = 0;
    for (std::size_t i : subset) sum += dr[i];
    return sum - static_cast<long long>(n1 * (n1 + 1));
  };
  std::vector<std::size_t> obs(n1);
  std::iota(obs.begin(), obs.end(), 0);
  const long long mu2 = static_cast<long long>(n1 * (n - n1));
  const long long obs_dev = std::llabs(doubled_u(obs) - mu2);

  std::vector<std::size_t> subset(n1);
  std::iota(subset.begin(), subset.end(), 0);
  std::size_t total = 0, extreme = 0;
  while (true) {
    ++total;
    if (std::llabs(doubled_u(subset) - mu2) >= obs_dev) ++extreme;
    std::size_t i = n1;
    bool advanced = false;
    while (i > 0) {
      --i;
      if (subset[i] != i + n - n1) {
        ++subset[i];
        for (std::size_t j = i + 1; j < n1; ++j) subset[j] = subset[j - 1] + 1;
        advanced = true;
        break;
      }
    }
    if (!advanced) return static_cast<double>(extreme) / static_cast<double>(total);
  }
}

void criterion_exact_u() {
  auto eng = make_engine(404);
  double worst = 0.0;
  int cases = 0;
  bool ok = true;
  for (std::size_t n1 = 1; n1 + 1 <= 10; ++n1) {
    for (std::size_t n2 = 1; n1 + n2 <= 10; ++n2) {
      for (int rep = 0; rep < 4; ++rep) {
        std::vector<double> a(n1), b(n2);
        for (auto& v : a) v = static_cast<double>(eng() % 6);  // ties likely
        for (auto& v : b) v = static_cast<double>(eng() % 6);
        auto r = mann_whitney_u(a, b);
        const double oracle = brute_force_mwu_p(a, b);
        worst = std::max(worst, std::abs(r.p_two_sided - oracle));
        ok = ok && r.exact && std::abs(r.p_two_sided - oracle) <= 1e-12;
        ++cases;
      }
    }
  }
  std::vector<double> a{1, 2}, b{3, 4};
  const double p_small = mann_whitney_u(a, b).p_two_sided;
  ok = ok && p_small == 1.0 / 3.0;
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "%d random tied cases, max |p - enumeration| = %.2g; {1,2}v{3,4} p = 1/3: %s",
                cases, worst, p_small == 1.0 / 3.0 ? "exact" : "WRONG");
  check(ok, "4 exact U-test oracle", detail);
}

// --- criterion 5: imputer contracts ----------------------------------------

bool is_connected(const AttributedGraph& g) {
  if (g.num_nodes() == 0) return true;
  std::vector<char> seen(g.num_nodes(), 0);
  std::vector<NodeId> stack{0};
  seen[0] = 1;
  std::size_t visited = 1;
  while (!stack.empty()) {
    NodeId u = stack.back();
    stack.pop_back();
    for (NodeId v : g.neighbors(u)) {
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        ++visited;
        stack.push_back(v);
      }
    }
  }
  return visited == g.num_nodes();
}

void criterion_imputer_contracts() {
  // Clamping invariant over 1,000 random (graph, mask) instances.
  bool clamp_ok = true;
  std::uint64_t checked = 0;
  for (std::uint64_t trial = 0; trial < 1000 && clamp_ok; ++trial) {
    SynthSpec s;
    s.num_nodes = 24 + (trial % 5) * 8;
    s.num_blocks = 2 + static_cast<int>(trial % 3);
    s.p_in = 0.15;
    s.p_out = 0.04;
    s.num_features = 2 + static_cast<int>(trial % 3);
    s.noise_sd = 0.6;
    s.seed = 5000 + trial;
    auto g = generate_sbm(s);
    MechanismSpec mspec;
    mspec.kind = trial % 2 == 0 ? MechanismKind::MCAR : MechanismKind::A_MNAR;
    mspec.p_miss = 0.1 + 0.6 * static_cast<double>(trial % 7) / 7.0;
    mspec.seed = 6000 + trial;
    auto mask = generate_mask(g, mspec);
    const ImputationResult results[3] = {
        impute_tabular_mean(g.features(), mask),
        impute_graph_average(g, g.features(), mask),
        impute_feature_propagation(g, g.features(), mask)};
    for (const auto& res : results) {
      for (std::size_t i = 0; i < mask.rows() && clamp_ok; ++i) {
        for (std::size_t j = 0; j < mask.cols(); ++j) {
          if (mask.observed(i, j) && res.imputed(i, j) != g.features()(i, j)) {
            clamp_ok = false;
            break;
          }
          ++checked;
        }
      }
    }
  }
  check(clamp_ok, "5a clamping invariant",
        "1000 random (graph, mask) instances x 3 imputers, " + std::to_string(checked) +
            " entries");

  // FP converges within 40 iterations at 20% MCAR on connected graphs.
  bool fp_ok = true;
  int worst_iters = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SynthSpec s;
    s.num_nodes = 300;
    s.num_blocks = 3;
    s.p_in = 0.1;
    s.p_out = 0.05;
    s.num_features = 4;
    s.noise_sd = 0.5;
    s.seed = 7000 + seed;
    auto g = generate_sbm(s);
    if (!is_connected(g)) continue;
    MechanismSpec mspec;
    mspec.kind = MechanismKind::MCAR;
    mspec.p_miss = 0.2;
    mspec.seed = 7100 + seed;
    auto mask = generate_mask(g, mspec);
    ImputerConfig cfg;  // max 40 iterations, tol 1e-6
    auto res = impute_feature_propagation(g, g.features(), mask, cfg);
    worst_iters = std::max(worst_iters, res.iterations);
    fp_ok = fp_ok && res.iterations < cfg.max_iters;
  }
  check(fp_ok, "5b feature propagation convergence",
        "residual <= 1e-6 within 40 sweeps on connected graphs (worst " +
            std::to_string(worst_iters) + ")");

  // Graph average degenerates to the tabular mean on edgeless graphs.
  bool equal_ok = true;
  for (std::uint64_t seed = 0; seed < 50 && equal_ok; ++seed) {
    SynthSpec s;
    s.num_nodes = 40;
    s.p_in = 0.0;
    s.p_out = 0.0;
    s.num_features = 3;
    s.noise_sd = 1.0;
    s.seed = 8000 + seed;
    auto g = generate_sbm(s);
    MechanismSpec mspec;
    mspec.kind = MechanismKind::MCAR;
    mspec.p_miss = 0.4;
    mspec.seed = 8100 + seed;
    auto mask = generate_mask(g, mspec);
    equal_ok = impute_graph_average(g, g.features(), mask).imputed ==
               impute_tabular_mean(g.features(), mask).imputed;
  }
  check(equal_ok, "5c graph-average = tabular-mean on edgeless graphs",
        "exact equality over 50 random instances");
}

// --- criterion 6: directional reproduction ---------------------------------

struct DirectionalOutcome {
  double mean_ref = 0.0;
  double mean_new = 0.0;
  double p_value = 1.0;
  bool significant_degradation = false;
  double h_adj = 0.0;
  double secs = 0.0;
};

DirectionalOutcome run_directional(const SynthSpec& synth, MechanismConfig ref,
                                   MechanismConfig neu, double rate,
                                   const std::string& imputer,
                                   const std::vector<int>& observed) {
  const auto t0 = Clock::now();
  auto g = generate_sbm(synth);
  DirectionalOutcome out;
  out.h_adj = adjusted_homophily(g);

  std::vector<MetricSample> samples;
  ImputerConfig icfg;
  for (const MechanismConfig* mc : {&ref, &neu}) {
    for (int rep = 0; rep < 8; ++rep) {
      MechanismSpec spec;
      spec.kind = mc->kind;
      spec.p_miss = rate;
      spec.omega = mc->omega.value_or(3.0);
      spec.sign = mc->sign;
      spec.hops = mc->hops.value_or(1);
      spec.column_split.observed_columns = observed;
      spec.seed = derive_seed(4242, {static_cast<std::uint64_t>(mc->kind),
                                     static_cast<std::uint64_t>(rep)});
      auto mask = generate_mask(g, spec);
      ImputationResult res;
      if (imputer == "feature_propagation") {
        res = impute_feature_propagation(g, g.features(), mask, icfg);
      } else {
        res = impute_graph_average(g, g.features(), mask);
      }
      auto err = masked_mae_rmse(g.features(), res.imputed, mask);
      MetricSample sample;
      sample.dataset = synth.name;
      sample.mechanism = to_string(mc->kind);
      sample.p_miss = rate;
      sample.imputer = imputer;
      sample.repetition = rep;
      sample.mae = err.mae;
      sample.rmse = err.rmse;
      samples.push_back(sample);
    }
  }
  auto table = build_comparison_table(samples, to_string(ref.kind), to_string(neu.kind), rate);
  const auto& cell = table.cells.at(0);
  for (const auto& s : samples) {
    (s.mechanism == to_string(ref.kind) ? out.mean_ref : out.mean_new) += s.mae / 8.0;
  }
  out.p_value = cell.p_value;
  out.significant_degradation =
      cell.significant && cell.direction == Direction::degradation;
  out.secs = seconds_since(t0);
  return out;
}

void criterion_directional() {
  // Homophilic half: FP under N-MNAR vs A-MNAR. Strengths follow the
  // per-mechanism omega_k of the operational definitions (omega_2 for the
  // attribute mechanism, omega_5 for the neighborhood one).
  {
    SynthSpec s;
    s.num_nodes = 1000;
    s.num_blocks = 100;
    s.p_in = 1.0;
    s.p_out = 0.0055;
    s.mu_gap = 2.0;
    s.num_features = 2;
    s.noise_sd = 0.3;
    s.seed = 61;
    s.name = "homophilic";
    MechanismConfig a_mnar;
    a_mnar.kind = MechanismKind::A_MNAR;
    a_mnar.omega = 1.0;
    MechanismConfig n_mnar;
    n_mnar.kind = MechanismKind::N_MNAR;
    n_mnar.omega = 3.0;
    auto out = run_directional(s, a_mnar, n_mnar, 0.5, "feature_propagation", {});
    char detail[200];
    std::snprintf(detail, sizeof(detail),
                  "H_adj=%.3f; FP MAE A-MNAR %.3f vs N-MNAR %.3f, exact U p=%.2e (%.0fs)",
                  out.h_adj, out.mean_ref, out.mean_new, out.p_value, out.secs);
    check(out.h_adj >= 0.6 && out.mean_new > out.mean_ref && out.significant_degradation &&
              out.secs < 120.0,
          "6a homophilic N-MNAR harder for FP", detail);
  }
  // Heterophilic half: graph average under N-MAR vs A-MAR at shared defaults.
  {
    SynthSpec s;
    s.num_nodes = 1000;
    s.num_blocks = 3;
    s.p_in = 0.0;
    s.p_out = 0.03;
    s.mu_gap = 2.0;
    s.num_features = 2;
    s.noise_sd = 0.3;
    s.seed = 62;
    s.name = "heterophilic";
    MechanismConfig a_mar;
    a_mar.kind = MechanismKind::A_MAR;
    MechanismConfig n_mar;
    n_mar.kind = MechanismKind::N_MAR;
    auto out = run_directional(s, a_mar, n_mar, 0.2, "graph_average", {0});
    char detail[200];
    std::snprintf(detail, sizeof(detail),
                  "H_adj=%.3f; GA MAE A-MAR %.3f vs N-MAR %.3f, exact U p=%.2e (%.0fs)",
                  out.h_adj, out.mean_ref, out.mean_new, out.p_value, out.secs);
    check(out.h_adj <= -0.2 && out.mean_new > out.mean_ref && out.significant_degradation &&
              out.secs < 120.0,
          "6b heterophilic N-MAR harder for graph average", detail);
  }
}

// --- criterion 7: adjusted homophily ----------------------------------------

void criterion_homophily() {
  {
    auto spec = SynthSpec{};
    spec.num_nodes = 6;
    spec.num_blocks = 2;
    spec.p_in = 1.0;
    spec.p_out = 0.0;
    spec.num_features = 2;
    spec.seed = 71;
    auto g = generate_sbm(spec);
    check(adjusted_homophily(g) == 1.0, "7a two-clique homophily",
          "H_adj = 1.0 exactly");
  }
  {
    auto spec = SynthSpec{};
    spec.num_nodes = 4;
    spec.num_blocks = 2;
    spec.p_in = 0.0;
    spec.p_out = 1.0;
    spec.num_features = 2;
    spec.seed = 72;
    auto g = generate_sbm(spec);
    check(adjusted_homophily(g) == -1.0, "7b balanced bipartite homophily",
          "H_adj = -1.0 exactly");
  }
  {
    fs::path cora;
    if (const char* env = std::getenv("GAMM_CORA_DIR")) cora = env;
    if (cora.empty() && fs::is_directory("datasets/cora")) cora = "datasets/cora";
    if (cora.empty() || !fs::is_directory(cora)) {
      skip("7c Cora homophily",
           "no Cora directory (set GAMM_CORA_DIR or provide datasets/cora; dataset is not "
           "bundled in this environment)");
      return;
    }
    auto g = load_graph(cora);
    const double h = adjusted_homophily(g);
    char detail[160];
    std::snprintf(detail, sizeof(detail), "n=%zu edges=%zu d=%zu H_adj=%.4f", g.num_nodes(),
                  g.num_edges(), g.num_features(), h);
    check(g.num_nodes() == 2708 && g.num_edges() == 5278 && g.num_features() == 1433 &&
              std::abs(h - 0.768) <= 0.005,
          "7c Cora homophily", detail);
  }
}

// --- criterion 8: determinism ------------------------------------------------

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void criterion_determinism() {
  const fs::path root = fs::temp_directory_path() / "gamm-acceptance-determinism";
  fs::remove_all(root);

  ExperimentConfig cfg;
  DatasetRef ds;
  SynthSpec s;
  s.num_nodes = 300;
  s.num_blocks = 2;
  s.p_in = 0.08;
  s.p_out = 0.02;
  s.num_features = 3;
  s.noise_sd = 0.4;
  s.seed = 81;
  s.name = "det";
  ds.synth = s;
  cfg.datasets = {ds};
  MechanismConfig a_mnar;
  a_mnar.kind = MechanismKind::A_MNAR;
  MechanismConfig n_mnar;
  n_mnar.kind = MechanismKind::N_MNAR;
  cfg.mechanisms = {a_mnar, n_mnar};
  cfg.p_miss = {0.2, 0.5};
  cfg.imputers = {"tabular_mean", "graph_average", "feature_propagation"};
  cfg.repetitions = 3;
  cfg.master_seed = 424242;
  cfg.output_dir = (root / "run").string();
  cfg.emit_masks = true;
  cfg.jobs = 4;

  run_experiment(cfg);
  std::string report1 = read_file(root / "run" / "report.json");
  std::vector<std::pair<std::string, std::string>> masks1;
  for (const auto& entry : fs::directory_iterator(root / "run" / "masks")) {
    masks1.emplace_back(entry.path().filename().string(), read_file(entry.path()));
  }
  std::sort(masks1.begin(), masks1.end());

  fs::remove_all(root / "run");
  run_experiment(cfg);
  std::string report2 = read_file(root / "run" / "report.json");
  bool masks_ok = true;
  std::size_t mask_count = 0;
  for (const auto& [name, bytes] : masks1) {
    masks_ok = masks_ok && read_file(root / "run" / "masks" / name) == bytes;
    ++mask_count;
  }
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "report.json %zu bytes identical; %zu mask files byte-identical",
                report1.size(), mask_count);
  check(!report1.empty() && report1 == report2 && masks_ok && mask_count == 12,
        "8 end-to-end determinism", detail);
  fs::remove_all(root);
}

// --- criterion 9: distributional fidelity ------------------------------------

void criterion_distributional() {
  SynthSpec s;
  s.num_nodes = 2000;
  s.num_blocks = 2;
  s.p_in = 0.05;
  s.p_out = 0.005;
  s.mu_gap = 1.0;
  s.num_features = 2;
  s.noise_sd = 0.05;  // bimodal {0,1}-like columns
  s.seed = 91;
  auto g = generate_sbm(s);

  MechanismSpec spec;
  spec.kind = MechanismKind::N_MNAR;
  spec.p_miss = 0.2;
  spec.seed = 92;
  auto mask = generate_mask(g, spec);
  auto res = impute_tabular_mean(g.features(), mask);

  // Column 0: modes at 0 and 1, midpoint 0.5. Compare full-column densities.
  std::vector<double> truth(g.num_nodes()), imputed(g.num_nodes());
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    truth[i] = g.features()(i, 0);
    imputed[i] = res.imputed(i, 0);
  }
  const double truth_mid = kde_pdf(truth, silverman_bandwidth(truth), 0.5);
  const double imputed_mid = kde_pdf(imputed, silverman_bandwidth(imputed), 0.5);
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "density at midpoint: imputed %.4f vs truth %.4f (ratio %.1fx)", imputed_mid,
                truth_mid, imputed_mid / truth_mid);
  check(imputed_mid >= 2.0 * truth_mid, "9 mass collapse between modes", detail);
}

}  // namespace

int main() {
  std::printf("GAMM acceptance suite\n");
  criterion_calibration();
  criterion_concentration();
  criterion_signatures();
  criterion_exact_u();
  criterion_imputer_contracts();
  criterion_directional();
  criterion_homophily();
  criterion_determinism();
  criterion_distributional();
  if (g_failures > 0) {
    std::printf("%d acceptance check(s) FAILED\n", g_failures);
    return 1;
  }
  std::printf("all acceptance checks passed\n");
  return 0;
}
