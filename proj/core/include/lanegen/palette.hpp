#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "lanegen/image.hpp"

namespace lanegen {

struct PaletteEntry {
  int class_id = 0;
  std::string name;
  std::array<double, 3> color{0.0, 0.0, 0.0};  // each channel in [0, 1]
};

// The class set and its canonical colors: the bridge between generated RGB
// distributions and class labels.
//
// Invariants, enforced at construction:
//   - class ids are unique and contiguous from 0
//   - class 0 is "background" with color (0,0,0)
//   - colors are pairwise distinct
class ClassPalette {
 public:
  explicit ClassPalette(std::vector<PaletteEntry> entries);

  // Road-marking classes with maximally separated colors. User-overridable
  // via load_palette.
  static ClassPalette default_palette();

  int size() const { return static_cast<int>(entries_.size()); }
  const PaletteEntry& entry(int class_id) const;
  const std::vector<PaletteEntry>& entries() const { return entries_; }
  bool has_class(int class_id) const {
    return class_id >= 0 && class_id < size();
  }
  // -1 when no entry carries the name.
  int find_by_name(const std::string& name) const;

  bool operator==(const ClassPalette& o) const;

 private:
  std::vector<PaletteEntry> entries_;
};

// Exact color lookup per pixel. Unknown class id raises a ValidationError
// naming the pixel and the id.
RgbImage render_labels(const LabelImage& labels, const ClassPalette& palette);

// Nearest palette color in RGB Euclidean distance; ties go to the lowest
// class id. Total on any image with channels in [0, 1].
LabelImage quantize(const RgbImage& image, const ClassPalette& palette);

// Plain-text CSV, one row per class: class_id,name,R,G,B with 8-bit integer
// channels. '#' lines are comments. Parse errors carry the line number.
ClassPalette load_palette(const std::filesystem::path& path);
void save_palette(const ClassPalette& palette, const std::filesystem::path& path);

}  // namespace lanegen
