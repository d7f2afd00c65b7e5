#include <benchmark/benchmark.h>

#include <vector>

#include "asru/asymptotic.hpp"
#include "asru/experiments.hpp"
#include "asru/gan.hpp"
#include "asru/graphs.hpp"
#include "asru/hmm.hpp"
#include "asru/ntk.hpp"
#include "asru/smrm.hpp"
#include "asru/spectral.hpp"

using namespace asru;

namespace {

HmmLanguage circulant_language(int d) {
  GraphSpec spec;
  spec.nodes = 81;
  for (int i = 1; i <= d; ++i) spec.action_set.push_back(i);
  return build_graph_language(spec, 0.0, 3, 4, true, 1);
}

}  // namespace

static void BM_SymmetricEigen(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Matrix s = symmetrize(sample_smrm(n, 3));
  for (auto _ : state) benchmark::DoNotOptimize(symmetric_eigen(s));
  state.SetComplexityN(n);
}
BENCHMARK(BM_SymmetricEigen)->RangeMultiplier(2)->Range(16, 512)->Complexity(benchmark::oNCubed);

static void BM_SigmaMin(benchmark::State& state) {
  HmmLanguage lang = circulant_language(10);
  Matrix px = exact_positional_unigrams(lang, static_cast<int>(state.range(0))).px;
  for (auto _ : state) benchmark::DoNotOptimize(sigma_min(px));
}
BENCHMARK(BM_SigmaMin)->Arg(20)->Arg(80)->Arg(320);

static void BM_ExactUnigrams(benchmark::State& state) {
  HmmLanguage lang = circulant_language(10);
  for (auto _ : state) benchmark::DoNotOptimize(exact_positional_unigrams(lang, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_ExactUnigrams)->Arg(20)->Arg(80);

static void BM_SampleCorpus(benchmark::State& state) {
  HmmLanguage lang = circulant_language(10);
  const int n = static_cast<int>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sample_corpus(lang, n, 80, false, seed++));
  state.SetItemsProcessed(state.iterations() * n * 80 * 4);
}
BENCHMARK(BM_SampleCorpus)->Arg(256)->Arg(2560)->Unit(benchmark::kMillisecond);

static void BM_RecoverPseudoinverse(benchmark::State& state) {
  GraphSpec spec;
  spec.nodes = 39;
  spec.action_set = {-1, 1};
  const int units = static_cast<int>(state.range(0));
  HmmLanguage lang = build_graph_language(fit_to_states(spec, units * units), 0.0, units, 2, true, 5);
  PositionalUnigramPair p = exact_positional_unigrams(lang, 20);
  for (auto _ : state) benchmark::DoNotOptimize(recover_pseudoinverse(p));
}
BENCHMARK(BM_RecoverPseudoinverse)->DenseRange(10, 14, 2);

static void BM_BruteForceOracle(benchmark::State& state) {
  const int units = static_cast<int>(state.range(0));
  PositionalUnigramPair p = exact_positional_unigrams(random_decipherable_language(units, 10, 0.5, 7), 10);
  for (auto _ : state) benchmark::DoNotOptimize(brute_force_oracle(p, 1e-8));
}
BENCHMARK(BM_BruteForceOracle)->DenseRange(3, 7);

static void BM_GanEpochs(benchmark::State& state) {
  HmmLanguage lang = circulant_language(2);
  PositionalUnigramPair p = empirical_positional_unigrams(sample_corpus(lang, 2560, 80, false, 3));
  TrainConfig cfg;
  cfg.epochs = 100;
  cfg.discriminator = state.range(0) ? DiscriminatorKind::PerStepMlp : DiscriminatorKind::LinearPositional;
  cfg.objective = state.range(0) ? Objective::Jsd : Objective::Mmd;
  for (auto _ : state) benchmark::DoNotOptimize(train(p, cfg));
  state.SetItemsProcessed(state.iterations() * cfg.epochs);
}
BENCHMARK(BM_GanEpochs)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_NtkIntegrate(benchmark::State& state) {
  HmmLanguage lang = random_decipherable_language(static_cast<int>(state.range(0)), 10, 0.7, 11);
  PositionalUnigramPair p = exact_positional_unigrams(lang, 10);
  NtkConfig cfg;
  cfg.mc_samples = 20000;
  for (auto _ : state) benchmark::DoNotOptimize(integrate_dynamics(p, cfg));
}
BENCHMARK(BM_NtkIntegrate)->Arg(3)->Arg(6)->Unit(benchmark::kMillisecond);

static void BM_GapStatistics(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(gap_statistics(n, 50, {1, 2, 3}, 9));
  state.SetItemsProcessed(state.iterations() * 50);
}
BENCHMARK(BM_GapStatistics)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
