// Model hot paths: inference and a full training step at the desk scale.

#include <benchmark/benchmark.h>

#include "lanegen/dataio.hpp"
#include "lanegen/model.hpp"
#include "lanegen/palette.hpp"
#include "lanegen/rng.hpp"
#include "lanegen/trainer.hpp"

using namespace lanegen;

namespace {

Tensor random_input(int channels, int size, std::uint64_t seed) {
  Rng rng(seed);
  Tensor t(1, channels, size, size);
  for (double& x : t.v) x = rng.uniform01();
  return t;
}

void BM_GeneratorInferDesk(benchmark::State& state) {
  Generator g(ArchConfig::desk_default());
  Rng rng(1);
  g.init(rng);
  const Tensor x = random_input(6, g.config().image_size, 2);
  for (auto _ : state) {
    Tensor y = g.infer(x);
    benchmark::DoNotOptimize(y.v.data());
  }
}
BENCHMARK(BM_GeneratorInferDesk)->Unit(benchmark::kMillisecond);

void BM_DiscriminatorInferDesk(benchmark::State& state) {
  Discriminator d(ArchConfig::desk_default());
  Rng rng(1);
  d.init(rng);
  const Tensor x = random_input(6, d.config().image_size, 3);
  for (auto _ : state) {
    Tensor s = d.infer(x);
    benchmark::DoNotOptimize(s.v.data());
  }
}
BENCHMARK(BM_DiscriminatorInferDesk)->Unit(benchmark::kMillisecond);

void BM_TrainStepDesk(benchmark::State& state) {
  TrainConfig tc;
  tc.epochs = 1;
  TrainState st = make_initial_state(tc);

  const ClassPalette palette = ClassPalette::default_palette();
  DatasetSplit split;
  split.name = "train";
  split.image_size = tc.arch.image_size;
  split.samples.push_back(synth_scene(7, palette, tc.arch.image_size));

  for (auto _ : state) {
    const LossBreakdown losses = train_step(st, split.samples);
    benchmark::DoNotOptimize(losses.l_total_g);
  }
}
BENCHMARK(BM_TrainStepDesk)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
