#include "lanegen/image.hpp"

#include <algorithm>
#include <cmath>

#include "lanegen/error.hpp"

namespace lanegen {

namespace {

void check_target_size(int out_h, int out_w) {
  if (out_h <= 0 || out_w <= 0) {
    throw ValidationError("resize: target size must be positive");
  }
}

}  // namespace

RgbImage resize_bilinear(const RgbImage& src, int out_h, int out_w) {
  check_target_size(out_h, out_w);
  if (src.height <= 0 || src.width <= 0) {
    throw ValidationError("resize: source image is empty");
  }
  if (src.height == out_h && src.width == out_w) return src;

  RgbImage dst(out_h, out_w);
  const double sy = static_cast<double>(src.height) / out_h;
  const double sx = static_cast<double>(src.width) / out_w;
  for (int y = 0; y < out_h; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    fy = std::clamp(fy, 0.0, static_cast<double>(src.height - 1));
    const int y0 = static_cast<int>(std::floor(fy));
    const int y1 = std::min(y0 + 1, src.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < out_w; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      fx = std::clamp(fx, 0.0, static_cast<double>(src.width - 1));
      const int x0 = static_cast<int>(std::floor(fx));
      const int x1 = std::min(x0 + 1, src.width - 1);
      const double wx = fx - x0;
      for (int c = 0; c < 3; ++c) {
        const double top = src.at(y0, x0, c) * (1.0 - wx) + src.at(y0, x1, c) * wx;
        const double bot = src.at(y1, x0, c) * (1.0 - wx) + src.at(y1, x1, c) * wx;
        dst.at(y, x, c) = top * (1.0 - wy) + bot * wy;
      }
    }
  }
  return dst;
}

LabelImage resize_nearest(const LabelImage& src, int out_h, int out_w) {
  check_target_size(out_h, out_w);
  if (src.height <= 0 || src.width <= 0) {
    throw ValidationError("resize: source label map is empty");
  }
  if (src.height == out_h && src.width == out_w) return src;

  LabelImage dst(out_h, out_w);
  const double sy = static_cast<double>(src.height) / out_h;
  const double sx = static_cast<double>(src.width) / out_w;
  for (int y = 0; y < out_h; ++y) {
    int yi = static_cast<int>(std::floor((y + 0.5) * sy));
    yi = std::clamp(yi, 0, src.height - 1);
    for (int x = 0; x < out_w; ++x) {
      int xi = static_cast<int>(std::floor((x + 0.5) * sx));
      xi = std::clamp(xi, 0, src.width - 1);
      dst.at(y, x) = src.at(yi, xi);
    }
  }
  return dst;
}

void clip01(RgbImage& img) {
  for (double& v : img.data) v = std::clamp(v, 0.0, 1.0);
}

}  // namespace lanegen
