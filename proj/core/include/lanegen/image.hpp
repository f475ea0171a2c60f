#pragma once

#include <cstdint>
#include <vector>

namespace lanegen {

// Continuous 3-channel image, channel values in [0, 1].
// Row-major, channels interleaved (HWC).
struct RgbImage {
  int height = 0;
  int width = 0;
  std::vector<double> data;  // height * width * 3

  RgbImage() = default;
  RgbImage(int h, int w, double fill = 0.0)
      : height(h), width(w), data(static_cast<std::size_t>(h) * w * 3, fill) {}

  double& at(int y, int x, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  double at(int y, int x, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(height) * width;
  }
  bool same_size(const RgbImage& o) const {
    return height == o.height && width == o.width;
  }
};

// Per-pixel class-id map. Valid ids are defined by the governing palette.
struct LabelImage {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> data;  // height * width

  LabelImage() = default;
  LabelImage(int h, int w, std::uint8_t fill = 0)
      : height(h), width(w), data(static_cast<std::size_t>(h) * w, fill) {}

  std::uint8_t& at(int y, int x) {
    return data[static_cast<std::size_t>(y) * width + x];
  }
  std::uint8_t at(int y, int x) const {
    return data[static_cast<std::size_t>(y) * width + x];
  }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(height) * width;
  }
  bool same_size(const LabelImage& o) const {
    return height == o.height && width == o.width;
  }
  bool operator==(const LabelImage& o) const {
    return height == o.height && width == o.width && data == o.data;
  }
};

// Context images are resampled bilinearly; label maps use nearest neighbor
// so no new class ids can appear.
RgbImage resize_bilinear(const RgbImage& src, int out_h, int out_w);
LabelImage resize_nearest(const LabelImage& src, int out_h, int out_w);

// Clamp every channel into [0, 1].
void clip01(RgbImage& img);

}  // namespace lanegen
