#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lanegen/image.hpp"
#include "lanegen/model.hpp"
#include "lanegen/palette.hpp"

namespace lanegen {

// Source channels for inference: i.i.d. Gaussian per channel, mean 0.5,
// sigma 0.25, clipped to [0,1] to stay in the trained input range.
RgbImage noise_image(int height, int width, std::uint64_t seed);

struct Generation {
  RgbImage image;     // generator output O
  LabelImage labels;  // quantize(O)
};

// O = G([noise | context]); labels = quantize(O). Deterministic in
// (params, context, seed); evaluation-mode normalization throughout.
Generation generate(const Generator& g, const RgbImage& context, std::uint64_t seed,
                    const ClassPalette& palette);

// Item k uses seed + k, so outputs are independent of batch composition and
// order. ms_per_frame, when given, receives the measured throughput
// (informational only).
std::vector<Generation> generate_batch(const Generator& g, const std::vector<RgbImage>& contexts,
                                       std::uint64_t seed, const ClassPalette& palette,
                                       double* ms_per_frame = nullptr);

// Pixel-agreement rate in [0,1] between the label maps generated from two
// noise seeds on the same context; a diagnostic for noise sensitivity.
double noise_agreement(const Generator& g, const RgbImage& context, std::uint64_t seed_a,
                       std::uint64_t seed_b, const ClassPalette& palette);

// Writes <stem>.gen.png (RGB output) and <stem>.label.png (palette-rendered
// labels) into dir.
void write_generation(const Generation& gen, const std::filesystem::path& dir,
                      const std::string& stem, const ClassPalette& palette);

}  // namespace lanegen
