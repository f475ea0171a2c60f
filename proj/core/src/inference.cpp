#include "lanegen/inference.hpp"

#include <chrono>
#include <system_error>

#include "lanegen/dataio.hpp"
#include "lanegen/error.hpp"
#include "lanegen/png_io.hpp"
#include "lanegen/rng.hpp"

namespace lanegen {

namespace {
constexpr std::uint64_t kNoiseImageTag = 0x736f75726365ULL;
}

RgbImage noise_image(int height, int width, std::uint64_t seed) {
  Rng rng(derive_seed(seed, {kNoiseImageTag}));
  RgbImage img(height, width);
  for (double& v : img.data) v = rng.normal(0.5, 0.25);
  clip01(img);
  return img;
}

Generation generate(const Generator& g, const RgbImage& context, std::uint64_t seed,
                    const ClassPalette& palette) {
  const int S = g.config().image_size;
  if (context.height != S || context.width != S)
    throw ValidationError("generate: context is " + std::to_string(context.height) + "x" +
                          std::to_string(context.width) + " but the model expects " +
                          std::to_string(S) + "x" + std::to_string(S));
  const RgbImage source = noise_image(S, S, seed);
  const ConditionedInput input = make_conditioned_input(source, context);
  const Tensor out = g.infer(input.data);
  Generation gen;
  gen.image = image_from_tensor(out, 0);
  clip01(gen.image);  // sigmoid already lands in [0,1]; clamp FP dust anyway
  gen.labels = quantize(gen.image, palette);
  return gen;
}

std::vector<Generation> generate_batch(const Generator& g, const std::vector<RgbImage>& contexts,
                                       std::uint64_t seed, const ClassPalette& palette,
                                       double* ms_per_frame) {
  for (std::size_t k = 1; k < contexts.size(); ++k)
    if (!contexts[k].same_size(contexts[0]))
      throw ValidationError("generate_batch: mixed context sizes at item " + std::to_string(k));
  const auto start = std::chrono::steady_clock::now();
  std::vector<Generation> out;
  out.reserve(contexts.size());
  for (std::size_t k = 0; k < contexts.size(); ++k)
    out.push_back(generate(g, contexts[k], seed + k, palette));
  if (ms_per_frame) {
    const std::chrono::duration<double, std::milli> elapsed =
        std::chrono::steady_clock::now() - start;
    *ms_per_frame = contexts.empty() ? 0.0 : elapsed.count() / static_cast<double>(contexts.size());
  }
  return out;
}

double noise_agreement(const Generator& g, const RgbImage& context, std::uint64_t seed_a,
                       std::uint64_t seed_b, const ClassPalette& palette) {
  const Generation a = generate(g, context, seed_a, palette);
  const Generation b = generate(g, context, seed_b, palette);
  std::size_t agree = 0;
  for (std::size_t i = 0; i < a.labels.data.size(); ++i)
    if (a.labels.data[i] == b.labels.data[i]) ++agree;
  return static_cast<double>(agree) / static_cast<double>(a.labels.data.size());
}

void write_generation(const Generation& gen, const std::filesystem::path& dir,
                      const std::string& stem, const ClassPalette& palette) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  write_png(gen.image, dir / (stem + ".gen.png"));
  write_png(render_labels(gen.labels, palette), dir / (stem + ".label.png"));
}

}  // namespace lanegen
