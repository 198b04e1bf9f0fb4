#include <benchmark/benchmark.h>

#include "csix/baselines.hpp"
#include "csix/embedding.hpp"
#include "csix/lrp.hpp"
#include "csix/manipulation.hpp"
#include "csix/mlp.hpp"
#include "csix/synth.hpp"

namespace {

csix::SynthConfig small_config() {
  csix::SynthConfig cfg;
  cfg.M = 4;
  cfg.train_per_loc = 25;
  cfg.test_per_loc = 5;
  cfg.seed = 3;
  return cfg;
}

const csix::Dataset& train_set() {
  static csix::Dataset d = csix::generate_synthetic(small_config()).first;
  return d;
}

const csix::NetworkParams& paper_net() {
  static csix::NetworkParams p =
      csix::init_random({120, 300, 280, 260, 4}, 1, csix::InitScheme::scaled);
  return p;
}

}  // namespace

static void BM_GenerateSynthetic(benchmark::State& state) {
  csix::SynthConfig cfg = small_config();
  for (auto _ : state) {
    auto pair = csix::generate_synthetic(cfg);
    benchmark::DoNotOptimize(pair.first.samples.size());
  }
}
BENCHMARK(BM_GenerateSynthetic);

static void BM_ForwardPass(benchmark::State& state) {
  const auto& p = paper_net();
  const csix::Vector& x = train_set().samples.front().channels;
  for (auto _ : state) {
    csix::ForwardTrace t = csix::forward(p, x);
    benchmark::DoNotOptimize(t.y.sum());
  }
}
BENCHMARK(BM_ForwardPass);

static void BM_Explain(benchmark::State& state) {
  const auto& p = paper_net();
  const csix::Vector& x = train_set().samples.front().channels;
  for (auto _ : state) {
    csix::RelevanceMap map = csix::explain(p, x, 1, 2);
    benchmark::DoNotOptimize(map.h.sum());
  }
}
BENCHMARK(BM_Explain);

static void BM_KnnPredict(benchmark::State& state) {
  const auto& train = train_set();
  const csix::Vector& x = train.samples.back().channels;
  for (auto _ : state) {
    benchmark::DoNotOptimize(csix::knn_predict(train, x, 5));
  }
}
BENCHMARK(BM_KnnPredict);

static void BM_TsneSmall(benchmark::State& state) {
  csix::Matrix data = train_set().channel_matrix().topRows(60);
  csix::TsneConfig cfg;
  cfg.perplexity = 10.0;
  cfg.iters = 50;
  cfg.seed = 1;
  for (auto _ : state) {
    csix::Embedding2D e = csix::tsne(data, cfg);
    benchmark::DoNotOptimize(e.final_kl);
  }
}
BENCHMARK(BM_TsneSmall);

static void BM_TrainEpochs(benchmark::State& state) {
  csix::TrainConfig cfg;
  cfg.backprop_iters = static_cast<int>(state.range(0));
  cfg.pretrain_iters = 0;
  cfg.seed = 2;
  auto init = csix::init_random({120, 64, 4}, 2, csix::InitScheme::scaled);
  for (auto _ : state) {
    auto result = csix::train(init, train_set(), cfg);
    benchmark::DoNotOptimize(result.loss_history.back());
  }
}
BENCHMARK(BM_TrainEpochs)->Arg(5);

BENCHMARK_MAIN();
