#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace lanegen {

// Dense NCHW tensor of doubles. Double precision keeps finite-difference
// gradient checks meaningful and makes training trajectories bit-stable.
struct Tensor {
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int n_, int c_, int h_, int w_)
      : n(n_), c(c_), h(h_), w(w_),
        v(static_cast<std::size_t>(n_) * c_ * h_ * w_, 0.0) {}

  static Tensor zeros_like(const Tensor& t) { return Tensor(t.n, t.c, t.h, t.w); }

  std::size_t size() const { return v.size(); }
  std::size_t plane() const { return static_cast<std::size_t>(h) * w; }

  double& at(int in, int ic, int iy, int ix) {
    return v[((static_cast<std::size_t>(in) * c + ic) * h + iy) * w + ix];
  }
  double at(int in, int ic, int iy, int ix) const {
    return v[((static_cast<std::size_t>(in) * c + ic) * h + iy) * w + ix];
  }

  bool same_shape(const Tensor& o) const {
    return n == o.n && c == o.c && h == o.h && w == o.w;
  }
  std::string shape_str() const;

  // Slice of `count` channels starting at `from`, all batch items.
  Tensor channel_slice(int from, int count) const;
};

// Channel-wise concatenation [a | b]; shapes must agree elsewhere.
Tensor concat_channels(const Tensor& a, const Tensor& b);

// Sum of all elements and basic finiteness scan.
double tensor_sum(const Tensor& t);
bool all_finite(const std::vector<double>& v);

}  // namespace lanegen
