#include <benchmark/benchmark.h>

#include <vector>

#include "gamm/graph.hpp"
#include "gamm/imputers.hpp"
#include "gamm/mann_whitney.hpp"
#include "gamm/mechanism.hpp"
#include "gamm/rng.hpp"
#include "gamm/synth.hpp"

namespace {

gamm::AttributedGraph bench_graph(std::size_t n) {
  gamm::SynthSpec s;
  s.num_nodes = n;
  s.num_blocks = 4;
  s.p_in = 0.02;
  s.p_out = 0.004;
  s.num_features = 16;
  s.noise_sd = 0.5;
  s.seed = 17;
  return gamm::generate_sbm(s);
}

gamm::MechanismSpec spec_for(gamm::MechanismKind kind) {
  gamm::MechanismSpec spec;
  spec.kind = kind;
  spec.p_miss = 0.5;
  spec.column_split.observed_columns = {0};
  spec.seed = 1;
  return spec;
}

void BM_BuildDriver(benchmark::State& state, gamm::MechanismKind kind) {
  auto g = bench_graph(static_cast<std::size_t>(state.range(0)));
  auto profile = gamm::structural_profile(g);
  auto spec = spec_for(kind);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gamm::build_driver(g, profile, spec));
  }
}

void BM_CalibrateBias(benchmark::State& state) {
  auto g = bench_graph(static_cast<std::size_t>(state.range(0)));
  auto profile = gamm::structural_profile(g);
  auto spec = spec_for(gamm::MechanismKind::N_MNAR);
  auto driver = gamm::build_driver(g, profile, spec);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gamm::calibrate_bias(driver, spec));
  }
}

void BM_GenerateMask(benchmark::State& state) {
  auto g = bench_graph(static_cast<std::size_t>(state.range(0)));
  auto spec = spec_for(gamm::MechanismKind::N_MNAR);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gamm::generate_mask(g, spec));
  }
}

void BM_FeaturePropagation(benchmark::State& state) {
  auto g = bench_graph(static_cast<std::size_t>(state.range(0)));
  auto mask = gamm::generate_mask(g, spec_for(gamm::MechanismKind::MCAR));
  for (auto _ : state) {
    benchmark::DoNotOptimize(gamm::impute_feature_propagation(g, g.features(), mask));
  }
}

void BM_MannWhitneyExact(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto eng = gamm::make_engine(3);
  std::vector<double> a(n), b(n);
  for (auto& v : a) v = gamm::uniform01(eng);
  for (auto& v : b) v = gamm::uniform01(eng) + 0.3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gamm::mann_whitney_u(a, b));
  }
}

void BM_KHopNeighbors(benchmark::State& state) {
  auto g = bench_graph(2000);
  const int hops = static_cast<int>(state.range(0));
  std::size_t node = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        gamm::k_hop_neighbors(g, static_cast<gamm::NodeId>(node % g.num_nodes()), hops));
    ++node;
  }
}

}  // namespace

BENCHMARK_CAPTURE(BM_BuildDriver, a_mnar, gamm::MechanismKind::A_MNAR)->Arg(1000)->Arg(4000);
BENCHMARK_CAPTURE(BM_BuildDriver, n_mnar, gamm::MechanismKind::N_MNAR)->Arg(1000)->Arg(4000);
BENCHMARK_CAPTURE(BM_BuildDriver, g_mnar, gamm::MechanismKind::G_MNAR)->Arg(1000);
BENCHMARK(BM_CalibrateBias)->Arg(1000)->Arg(4000);
BENCHMARK(BM_GenerateMask)->Arg(1000)->Arg(4000);
BENCHMARK(BM_FeaturePropagation)->Arg(1000)->Arg(4000);
BENCHMARK(BM_MannWhitneyExact)->Arg(8)->Arg(12);
BENCHMARK(BM_KHopNeighbors)->Arg(1)->Arg(2)->Arg(3);

BENCHMARK_MAIN();
