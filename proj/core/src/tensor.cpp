#include "lanegen/tensor.hpp"

#include <cmath>
#include <cstring>
#include <numeric>

#include "lanegen/error.hpp"

namespace lanegen {

std::string Tensor::shape_str() const {
  return "(" + std::to_string(n) + "," + std::to_string(c) + "," +
         std::to_string(h) + "," + std::to_string(w) + ")";
}

Tensor Tensor::channel_slice(int from, int count) const {
  if (from < 0 || count <= 0 || from + count > c) {
    throw ValidationError("channel_slice: range [" + std::to_string(from) + "," +
                          std::to_string(from + count) + ") out of " + std::to_string(c));
  }
  Tensor out(n, count, h, w);
  const std::size_t pl = plane();
  for (int in = 0; in < n; ++in) {
    const double* src = v.data() + (static_cast<std::size_t>(in) * c + from) * pl;
    double* dst = out.v.data() + static_cast<std::size_t>(in) * count * pl;
    std::memcpy(dst, src, sizeof(double) * count * pl);
  }
  return out;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  if (a.n != b.n || a.h != b.h || a.w != b.w) {
    throw ValidationError("concat_channels: shape mismatch " + a.shape_str() + " vs " +
                          b.shape_str());
  }
  Tensor out(a.n, a.c + b.c, a.h, a.w);
  const std::size_t pl = a.plane();
  for (int in = 0; in < a.n; ++in) {
    std::memcpy(out.v.data() + static_cast<std::size_t>(in) * out.c * pl,
                a.v.data() + static_cast<std::size_t>(in) * a.c * pl,
                sizeof(double) * a.c * pl);
    std::memcpy(out.v.data() + (static_cast<std::size_t>(in) * out.c + a.c) * pl,
                b.v.data() + static_cast<std::size_t>(in) * b.c * pl,
                sizeof(double) * b.c * pl);
  }
  return out;
}

double tensor_sum(const Tensor& t) {
  return std::accumulate(t.v.begin(), t.v.end(), 0.0);
}

bool all_finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace lanegen
