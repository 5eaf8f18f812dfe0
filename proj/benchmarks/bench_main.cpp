#include <benchmark/benchmark.h>

#include <random>

#include "spectrack/attention.hpp"
#include "spectrack/matrix.hpp"
#include "spectrack/model.hpp"

using namespace spectrack;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return random_normal(r, c, 1.0, rng);
}

ModelConfig bench_config(std::size_t d) {
  ModelConfig cfg;
  cfg.d = d;
  cfg.heads = 4;
  cfg.backbone_blocks = 1;
  cfg.bands = 16;
  cfg.mlp_ratio = 2;
  return cfg;
}

}  // namespace

static void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, n, 1), b = random_matrix(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Matmul)->RangeMultiplier(2)->Range(16, 128)->Complexity(benchmark::oNCubed);

static void BM_AttentionBlock(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(3);
  ParamSet params;
  init_attention_block(params, "blk", d, 2 * d, rng);
  const Matrix x = random_matrix(64, d, 4);
  const AttentionOptions opt{4, std::nullopt, 8, 8};
  for (auto _ : state) {
    Tape tape;
    ParamBinder bind(tape, params);
    Var y = attention_block(bind, "blk", tape.constant(x), opt);
    benchmark::DoNotOptimize(y.value().data());
  }
}
BENCHMARK(BM_AttentionBlock)->Arg(16)->Arg(32)->Arg(64);

static void BM_ModelForward(benchmark::State& state) {
  const ModelConfig cfg = bench_config(static_cast<std::size_t>(state.range(0)));
  const TrackModel model(cfg, init_model_params(cfg, 5));
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  auto cube = [&](std::size_t b, std::size_t s) {
    HsiCube c(b, s, s);
    for (auto& v : c.data()) v = u(rng);
    return c;
  };
  const CropInput t = prepare_crop(cube(3, 64), cube(16, 64), cfg);
  const CropInput s = prepare_crop(cube(3, 128), cube(16, 128), cfg);
  const TokenGrid feat = model.encode_template(t);
  for (auto _ : state) benchmark::DoNotOptimize(model.predict_search(feat, s).cls.data());
}
BENCHMARK(BM_ModelForward)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
