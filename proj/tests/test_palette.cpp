// Palette construction invariants, exact color rendering, nearest-color
// quantization against an exhaustive search oracle, and the CSV round trip.

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "lanegen/error.hpp"
#include "lanegen/palette.hpp"
#include "lanegen/rng.hpp"

using namespace lanegen;
namespace fs = std::filesystem;

namespace {

ClassPalette two_tone() {
  return ClassPalette({{0, "background", {0.0, 0.0, 0.0}}, {1, "lane", {1.0, 0.0, 0.0}}});
}

// Exhaustive argmin over classes with the lowest-id tie rule; the oracle
// quantize() must agree with everywhere.
int nearest_class_oracle(double r, double g, double b, const ClassPalette& p) {
  int best = 0;
  double best_d = 1e300;
  for (int c = 0; c < p.size(); ++c) {
    const auto& col = p.entry(c).color;
    const double d = (r - col[0]) * (r - col[0]) + (g - col[1]) * (g - col[1]) +
                     (b - col[2]) * (b - col[2]);
    if (d < best_d) {  // strict: ties keep the earlier (lower) id
      best_d = d;
      best = c;
    }
  }
  return best;
}

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "lanegen_palette_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("palette construction enforces the invariants") {
  CHECK_NOTHROW(two_tone());
  // Class 0 must be black background.
  CHECK_THROWS_AS(ClassPalette({{0, "background", {0.1, 0.0, 0.0}}}), ValidationError);
  // Contiguous ids from 0.
  CHECK_THROWS_AS(ClassPalette({{0, "background", {0.0, 0.0, 0.0}}, {2, "x", {1.0, 0.0, 0.0}}}),
                  ValidationError);
  // Pairwise distinct colors.
  CHECK_THROWS_AS(ClassPalette({{0, "background", {0.0, 0.0, 0.0}},
                                {1, "a", {1.0, 0.0, 0.0}},
                                {2, "b", {1.0, 0.0, 0.0}}}),
                  ValidationError);
}

TEST_CASE("render_labels looks colors up exactly") {
  const ClassPalette p({{0, "background", {0.0, 0.0, 0.0}},
                        {1, "a", {1.0, 1.0, 1.0}},
                        {2, "b", {0.0, 1.0, 0.0}}});

  // All-background renders to all black.
  const RgbImage black = render_labels(LabelImage(3, 3, 0), p);
  for (double v : black.data) CHECK(v == 0.0);

  // A single class-2 pixel gets exactly the palette color.
  LabelImage one(1, 1, 2);
  const RgbImage img = render_labels(one, p);
  CHECK(img.at(0, 0, 0) == 0.0);
  CHECK(img.at(0, 0, 1) == 1.0);
  CHECK(img.at(0, 0, 2) == 0.0);

  // Unknown id names the pixel and the id.
  LabelImage bad(2, 2, 0);
  bad.at(1, 0) = 9;
  CHECK_THROWS_WITH_AS(render_labels(bad, p), doctest::Contains("9"), ValidationError);
}

TEST_CASE("quantize picks the nearest color with lowest-id ties") {
  const ClassPalette p = two_tone();
  RgbImage img(1, 2);
  img.at(0, 0, 0) = 0.6;  // distance 0.4 to red, 0.6 to black -> class 1
  img.at(0, 1, 0) = 0.5;  // equidistant -> tie broken to class 0
  const LabelImage labels = quantize(img, p);
  CHECK(labels.at(0, 0) == 1);
  CHECK(labels.at(0, 1) == 0);
}

TEST_CASE("quantize of an exact palette color returns that class") {
  const ClassPalette p = ClassPalette::default_palette();
  for (int c = 0; c < p.size(); ++c) {
    RgbImage img(1, 1);
    for (int ch = 0; ch < 3; ++ch) img.at(0, 0, ch) = p.entry(c).color[static_cast<std::size_t>(ch)];
    CHECK(quantize(img, p).at(0, 0) == c);
  }
}

TEST_CASE("quantize agrees with the exhaustive nearest-color oracle") {
  // 10-class palette on the 8-bit grid, colors spread deterministically.
  std::vector<PaletteEntry> entries{{0, "background", {0.0, 0.0, 0.0}}};
  Rng color_rng(404);
  std::set<std::array<int, 3>> used{{0, 0, 0}};
  while (entries.size() < 10) {
    std::array<int, 3> c8{color_rng.uniform_int(0, 255), color_rng.uniform_int(0, 255),
                          color_rng.uniform_int(0, 255)};
    if (!used.insert(c8).second) continue;
    entries.push_back({static_cast<int>(entries.size()),
                       "c" + std::to_string(entries.size()),
                       {c8[0] / 255.0, c8[1] / 255.0, c8[2] / 255.0}});
  }
  const ClassPalette p(entries);

  Rng rng(707);
  for (int trial = 0; trial < 20; ++trial) {
    RgbImage img(8, 8);
    for (double& v : img.data) v = rng.uniform01();
    const LabelImage got = quantize(img, p);
    const LabelImage again = quantize(img, p);
    CHECK(got == again);  // tie-breaking determinism
    for (int y = 0; y < 8; ++y)
      for (int x = 0; x < 8; ++x)
        CHECK(got.at(y, x) ==
              nearest_class_oracle(img.at(y, x, 0), img.at(y, x, 1), img.at(y, x, 2), p));
  }
}

TEST_CASE("quantize after render_labels is the identity") {
  const ClassPalette p = ClassPalette::default_palette();
  Rng rng(111);
  for (int trial = 0; trial < 100; ++trial) {
    LabelImage labels(6, 6);
    for (auto& v : labels.data)
      v = static_cast<std::uint8_t>(rng.uniform_int(0, p.size() - 1));
    CHECK(quantize(render_labels(labels, p), p) == labels);
  }
}

TEST_CASE("palette csv parses 8-bit rows and normalizes to [0,1]") {
  const fs::path path = temp_file("two.csv");
  {
    std::ofstream out(path);
    out << "# class_id,name,R,G,B\n";
    out << "0,background,0,0,0\n";
    out << "1,dividing_lane,255,255,255\n";
  }
  const ClassPalette p = load_palette(path);
  REQUIRE(p.size() == 2);
  CHECK(p.entry(1).name == "dividing_lane");
  CHECK(p.entry(1).color[0] == 1.0);
  CHECK(p.entry(1).color[1] == 1.0);
  CHECK(p.entry(1).color[2] == 1.0);
}

TEST_CASE("palette csv errors carry the line number") {
  const fs::path path = temp_file("bad.csv");
  {
    std::ofstream out(path);
    out << "0,background,0,0,0\n";
    out << "1,a,255,0,0\n";
    out << "2,b,255,0,0\n";  // duplicate color, line 3
  }
  CHECK_THROWS_WITH_AS(load_palette(path), doctest::Contains("3"), FormatError);

  const fs::path range_path = temp_file("range.csv");
  {
    std::ofstream out(range_path);
    out << "0,background,0,0,0\n";
    out << "1,a,256,0,0\n";  // out of 8-bit range, line 2
  }
  CHECK_THROWS_WITH_AS(load_palette(range_path), doctest::Contains("2"), FormatError);
}

TEST_CASE("palette save then load round-trips structurally") {
  Rng rng(2024);
  std::vector<PaletteEntry> entries{{0, "background", {0.0, 0.0, 0.0}}};
  std::set<std::array<int, 3>> used{{0, 0, 0}};
  while (entries.size() < 10) {
    std::array<int, 3> c8{rng.uniform_int(0, 255), rng.uniform_int(0, 255),
                          rng.uniform_int(0, 255)};
    if (!used.insert(c8).second) continue;
    entries.push_back({static_cast<int>(entries.size()),
                       "class_" + std::to_string(entries.size()),
                       {c8[0] / 255.0, c8[1] / 255.0, c8[2] / 255.0}});
  }
  const ClassPalette p(entries);
  const fs::path path = temp_file("roundtrip.csv");
  save_palette(p, path);
  CHECK(load_palette(path) == p);
}
