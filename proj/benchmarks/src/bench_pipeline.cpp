// Data-path hot spots: scene synthesis, palette quantization, metric
// accumulation, and end-to-end conditioned generation.

#include <benchmark/benchmark.h>

#include "lanegen/dataio.hpp"
#include "lanegen/inference.hpp"
#include "lanegen/metrics.hpp"
#include "lanegen/model.hpp"
#include "lanegen/palette.hpp"
#include "lanegen/rng.hpp"

using namespace lanegen;

namespace {

void BM_SynthScene(benchmark::State& state) {
  const ClassPalette palette = ClassPalette::default_palette();
  const int size = static_cast<int>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    SamplePair pair = synth_scene(seed++, palette, size);
    benchmark::DoNotOptimize(pair.context.data.data());
  }
}
BENCHMARK(BM_SynthScene)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);

void BM_Quantize(benchmark::State& state) {
  const ClassPalette palette = ClassPalette::default_palette();
  const int size = static_cast<int>(state.range(0));
  Rng rng(5);
  RgbImage img(size, size);
  for (double& x : img.data) x = rng.uniform01();
  for (auto _ : state) {
    LabelImage labels = quantize(img, palette);
    benchmark::DoNotOptimize(labels.data.data());
  }
}
BENCHMARK(BM_Quantize)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_ConfusionAccumulate(benchmark::State& state) {
  const ClassPalette palette = ClassPalette::default_palette();
  const SamplePair a = synth_scene(11, palette, 64);
  const SamplePair b = synth_scene(12, palette, 64);
  for (auto _ : state) {
    ConfusionCounts counts(palette.size());
    counts.accumulate(a.target, b.target);
    benchmark::DoNotOptimize(counts.total_pixels());
  }
}
BENCHMARK(BM_ConfusionAccumulate)->Unit(benchmark::kMicrosecond);

void BM_GenerateDesk(benchmark::State& state) {
  const ClassPalette palette = ClassPalette::default_palette();
  Generator g(ArchConfig::desk_default());
  Rng rng(1);
  g.init(rng);
  const SamplePair scene = synth_scene(21, palette, g.config().image_size);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    Generation out = generate(g, scene.context, seed++, palette);
    benchmark::DoNotOptimize(out.labels.data.data());
  }
}
BENCHMARK(BM_GenerateDesk)->Unit(benchmark::kMillisecond);

}  // namespace
