// Conditioned-input channel ordering, dataset round trips through the
// on-disk layout, orphan detection, label-resize class preservation, and
// determinism of the synthetic scene generator.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "lanegen/dataio.hpp"
#include "lanegen/error.hpp"
#include "lanegen/image.hpp"
#include "lanegen/palette.hpp"
#include "lanegen/rng.hpp"

using namespace lanegen;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "lanegen_dataio_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RgbImage random_image(int h, int w, Rng& rng) {
  RgbImage img(h, w);
  for (double& v : img.data) v = rng.uniform01();
  return img;
}

}  // namespace

TEST_CASE("to_tensor and image_from_tensor are inverse") {
  Rng rng(61);
  const RgbImage img = random_image(5, 7, rng);
  const Tensor t = to_tensor(img);
  REQUIRE(t.n == 1);
  REQUIRE(t.c == 3);
  REQUIRE(t.h == 5);
  REQUIRE(t.w == 7);
  CHECK(t.at(0, 2, 3, 4) == img.at(3, 4, 2));
  const RgbImage back = image_from_tensor(t, 0);
  CHECK(back.data == img.data);
}

TEST_CASE("conditioned input stacks source then context") {
  Rng rng(62);
  const RgbImage source = random_image(6, 6, rng);
  const RgbImage context = random_image(6, 6, rng);
  const ConditionedInput in = make_conditioned_input(source, context);
  REQUIRE(in.data.c == 6);
  REQUIRE(in.data.h == 6);

  // Channel 4 of the input equals channel 1 of the context everywhere.
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 6; ++x) CHECK(in.data.at(0, 4, y, x) == context.at(y, x, 1));

  // All-zero source keeps the first three channels zero, last three context.
  const ConditionedInput zin = make_conditioned_input(RgbImage(6, 6), context);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 6; ++y)
      for (int x = 0; x < 6; ++x) {
        CHECK(zin.data.at(0, c, y, x) == 0.0);
        CHECK(zin.data.at(0, c + 3, y, x) == context.at(y, x, c));
      }

  // Splitting then re-concatenating is the identity.
  const auto [s2, c2] = split_conditioned_input(in);
  CHECK(s2.data == source.data);
  CHECK(c2.data == context.data);

  CHECK_THROWS_AS(make_conditioned_input(RgbImage(4, 4), context), ValidationError);
}

TEST_CASE("label resize never introduces new class ids") {
  Rng rng(63);
  for (int trial = 0; trial < 20; ++trial) {
    LabelImage src(13, 9);
    std::set<std::uint8_t> present;
    for (auto& v : src.data) {
      v = static_cast<std::uint8_t>(rng.uniform_int(0, 4) == 0 ? rng.uniform_int(1, 5) : 0);
      present.insert(v);
    }
    const LabelImage dst = resize_nearest(src, 7, 21);
    for (auto v : dst.data) CHECK(present.count(v) == 1);
  }
}

TEST_CASE("synth_scene is a pure function of its seed") {
  const ClassPalette p = ClassPalette::default_palette();
  const SamplePair a = synth_scene(42, p, 64);
  const SamplePair b = synth_scene(42, p, 64);
  CHECK(a.context.data == b.context.data);
  CHECK(a.target == b.target);
  CHECK(a.id == b.id);

  const SamplePair c = synth_scene(43, p, 64);
  CHECK(a.target.data != c.target.data);
}

TEST_CASE("synth_scene output is a valid sample") {
  const ClassPalette p = ClassPalette::default_palette();
  for (std::uint64_t seed : {1ull, 7ull, 99ull}) {
    const SamplePair s = synth_scene(seed, p, 64);
    CHECK(s.context.height == 64);
    CHECK(s.context.width == 64);
    for (double v : s.context.data) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    // Background dominates every road scene.
    long bg = std::count(s.target.data.begin(), s.target.data.end(), std::uint8_t{0});
    CHECK(bg > static_cast<long>(s.target.pixel_count()) / 2);
    for (auto v : s.target.data) CHECK(p.has_class(v));
  }
  CHECK_THROWS_AS(synth_scene(1, p, 8), ConfigError);
}

TEST_CASE("synth_dataset produces disjoint, correctly sized splits") {
  const ClassPalette p = ClassPalette::default_palette();
  const Dataset ds = synth_dataset(1, SplitCounts{8, 2, 2}, p, 32);
  CHECK(ds.train.samples.size() == 8);
  CHECK(ds.val.samples.size() == 2);
  CHECK(ds.test.samples.size() == 2);

  std::set<std::string> ids;
  for (const DatasetSplit* split : {&ds.train, &ds.val, &ds.test})
    for (const SamplePair& s : split->samples) CHECK(ids.insert(s.id).second);
  CHECK(ids.size() == 12);

  CHECK_THROWS_AS(synth_dataset(1, SplitCounts{0, 1, 1}, p, 32), ConfigError);
}

TEST_CASE("dataset write then load round-trips samples") {
  const ClassPalette p = ClassPalette::default_palette();
  const fs::path root = temp_dir("roundtrip");
  const Dataset ds = synth_dataset(5, SplitCounts{3, 1, 1}, p, 32);
  write_dataset(root.string(), ds, p);

  const Dataset back = load_dataset(root.string(), p, 32);
  REQUIRE(back.train.samples.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    const SamplePair& a = ds.train.samples[i];
    const SamplePair& b = back.train.samples[i];
    CHECK(a.id == b.id);
    // Labels round-trip exactly (rendered to palette PNG, quantized back).
    CHECK(a.target == b.target);
    // Context goes through 8-bit PNG: equal within half a quantization step.
    REQUIRE(a.context.data.size() == b.context.data.size());
    double worst = 0.0;
    for (std::size_t k = 0; k < a.context.data.size(); ++k)
      worst = std::max(worst, std::abs(a.context.data[k] - b.context.data[k]));
    CHECK(worst <= 0.5 / 255.0 + 1e-12);
  }
}

TEST_CASE("write_dataset twice from one seed produces identical files") {
  const ClassPalette p = ClassPalette::default_palette();
  const fs::path a = temp_dir("det_a");
  const fs::path b = temp_dir("det_b");
  write_dataset(a.string(), synth_dataset(11, SplitCounts{2, 1, 1}, p, 32), p);
  write_dataset(b.string(), synth_dataset(11, SplitCounts{2, 1, 1}, p, 32), p);

  int compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), a);
    std::ifstream fa(entry.path(), std::ios::binary);
    std::ifstream fb(b / rel, std::ios::binary);
    REQUIRE(fb.good());
    const std::string da((std::istreambuf_iterator<char>(fa)), {});
    const std::string db((std::istreambuf_iterator<char>(fb)), {});
    CHECK(da == db);
    ++compared;
  }
  CHECK(compared == 8);  // 4 samples, image + label each
}

TEST_CASE("orphan stems are reported by name") {
  const ClassPalette p = ClassPalette::default_palette();
  const fs::path root = temp_dir("orphan");
  write_dataset(root.string(), synth_dataset(3, SplitCounts{2, 1, 1}, p, 32), p);
  // Drop one label file: its stem must appear in the error.
  fs::remove(root / "train" / "labels" / "scene_00001.png");
  CHECK_THROWS_WITH_AS(load_split(root.string(), "train", p, 32),
                       doctest::Contains("scene_00001"), ValidationError);
}

TEST_CASE("load_split resizes to the requested working size") {
  const ClassPalette p = ClassPalette::default_palette();
  const fs::path root = temp_dir("resize");
  write_dataset(root.string(), synth_dataset(9, SplitCounts{2, 1, 1}, p, 64), p);
  const DatasetSplit split = load_split(root.string(), "train", p, 32);
  REQUIRE(split.samples.size() == 2);
  CHECK(split.image_size == 32);
  CHECK(split.samples[0].context.height == 32);
  CHECK(split.samples[0].target.width == 32);
  for (auto v : split.samples[0].target.data) CHECK(p.has_class(v));
}
