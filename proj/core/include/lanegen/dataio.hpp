#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lanegen/image.hpp"
#include "lanegen/palette.hpp"
#include "lanegen/tensor.hpp"

namespace lanegen {

// One training example: a color road scene and its per-pixel class labels.
struct SamplePair {
  RgbImage context;
  LabelImage target;
  std::string id;
};

struct DatasetSplit {
  std::string name;  // train | val | test
  std::vector<SamplePair> samples;
  int image_size = 0;
};

struct Dataset {
  DatasetSplit train, val, test;
};

// 6-channel network input: channels 0-2 carry the source (rendered target
// while training, noise at inference), channels 3-5 the road-scene context.
struct ConditionedInput {
  Tensor data;  // (1, 6, S, S)
};

Tensor to_tensor(const RgbImage& img);                 // (1, 3, H, W)
RgbImage image_from_tensor(const Tensor& t, int item);  // one batch item back to HWC

ConditionedInput make_conditioned_input(const RgbImage& source, const RgbImage& context);
// Inverse of make_conditioned_input; used to verify the channel ordering.
std::pair<RgbImage, RgbImage> split_conditioned_input(const ConditionedInput& in);

// Directory layout: <root>/<split>/{images,labels}/<stem>.png, stems matched
// exactly. Contexts are resized bilinearly, labels with nearest neighbor and
// then quantized against the palette.
DatasetSplit load_split(const std::string& root, const std::string& name,
                        const ClassPalette& palette, int image_size);
Dataset load_dataset(const std::string& root, const ClassPalette& palette, int image_size);

// Materializes a split under <root>/<name>/{images,labels}; labels are
// rendered to palette RGB. Returns the number of files written.
int write_split(const std::string& root, const DatasetSplit& split, const ClassPalette& palette);
void write_dataset(const std::string& root, const Dataset& ds, const ClassPalette& palette);

// Deterministic synthetic road scene: perspective road, 2-4 lane lines
// (solid or dashed), optional crossing stripes / stop line / turn arrow,
// textured asphalt and sky, photometric jitter. Pure in (seed, palette,
// image_size).
SamplePair synth_scene(std::uint64_t seed, const ClassPalette& palette, int image_size);

struct SplitCounts {
  int train = 8;
  int val = 2;
  int test = 2;
};

// Scenes are drawn from disjoint per-sample seed derivations, so splits are
// disjoint by construction and any prefix is stable under count changes.
Dataset synth_dataset(std::uint64_t seed, const SplitCounts& counts, const ClassPalette& palette,
                      int image_size);

}  // namespace lanegen
