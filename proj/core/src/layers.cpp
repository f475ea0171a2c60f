#include "lanegen/layers.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstring>

#include "lanegen/error.hpp"

namespace lanegen {

namespace {

using MatRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<MatRM>;
using CMapRM = Eigen::Map<const MatRM>;

// col has in_ch*k*k rows and out_h*out_w columns, row-major.
void im2col(const Tensor& x, int item, int ksize, int stride, int pad,
            int out_h, int out_w, double* col) {
  const int in_h = x.h, in_w = x.w;
  const std::size_t plane = x.plane();
  const double* base = x.v.data() + static_cast<std::size_t>(item) * x.c * plane;
  std::size_t row = 0;
  for (int ci = 0; ci < x.c; ++ci) {
    const double* src = base + static_cast<std::size_t>(ci) * plane;
    for (int ky = 0; ky < ksize; ++ky) {
      for (int kx = 0; kx < ksize; ++kx, ++row) {
        double* dst = col + row * static_cast<std::size_t>(out_h) * out_w;
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= in_h) {
            std::memset(dst + static_cast<std::size_t>(oy) * out_w, 0,
                        sizeof(double) * out_w);
            continue;
          }
          const double* src_row = src + static_cast<std::size_t>(iy) * in_w;
          double* dst_row = dst + static_cast<std::size_t>(oy) * out_w;
          for (int ox = 0; ox < out_w; ++ox) {
            const int ix = ox * stride - pad + kx;
            dst_row[ox] = (ix >= 0 && ix < in_w) ? src_row[ix] : 0.0;
          }
        }
      }
    }
  }
}

void col2im_add(const double* col, int in_c, int in_h, int in_w, int ksize,
                int stride, int pad, int out_h, int out_w, double* dx) {
  std::size_t row = 0;
  const std::size_t plane = static_cast<std::size_t>(in_h) * in_w;
  for (int ci = 0; ci < in_c; ++ci) {
    double* dst = dx + static_cast<std::size_t>(ci) * plane;
    for (int ky = 0; ky < ksize; ++ky) {
      for (int kx = 0; kx < ksize; ++kx, ++row) {
        const double* src = col + row * static_cast<std::size_t>(out_h) * out_w;
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= in_h) continue;
          const double* src_row = src + static_cast<std::size_t>(oy) * out_w;
          double* dst_row = dst + static_cast<std::size_t>(iy) * in_w;
          for (int ox = 0; ox < out_w; ++ox) {
            const int ix = ox * stride - pad + kx;
            if (ix >= 0 && ix < in_w) dst_row[ix] += src_row[ox];
          }
        }
      }
    }
  }
}

}  // namespace

Conv2d::Conv2d(int in, int out, int k, int s, int p)
    : in_ch(in), out_ch(out), ksize(k), stride(s), pad(p),
      w(static_cast<std::size_t>(out) * in * k * k, 0.0),
      b(static_cast<std::size_t>(out), 0.0),
      gw(w.size(), 0.0),
      gb(b.size(), 0.0) {}

void Conv2d::init(Rng& rng, double gain) {
  const double fan_in = static_cast<double>(in_ch) * ksize * ksize;
  const double std_dev = gain / std::sqrt(fan_in);
  for (double& x : w) x = rng.normal(0.0, std_dev);
  for (double& x : b) x = 0.0;
}

Tensor Conv2d::run(const Tensor& x) const {
  if (x.c != in_ch) {
    throw ValidationError("conv: expected " + std::to_string(in_ch) + " channels, got " +
                          x.shape_str());
  }
  const int oh = out_size(x.h), ow = out_size(x.w);
  Tensor y(x.n, out_ch, oh, ow);
  const std::size_t K = static_cast<std::size_t>(in_ch) * ksize * ksize;
  const std::size_t P = static_cast<std::size_t>(oh) * ow;
  std::vector<double> col(K * P);
  CMapRM wm(w.data(), out_ch, static_cast<Eigen::Index>(K));
  for (int i = 0; i < x.n; ++i) {
    im2col(x, i, ksize, stride, pad, oh, ow, col.data());
    CMapRM cm(col.data(), static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(P));
    MapRM ym(y.v.data() + static_cast<std::size_t>(i) * out_ch * P, out_ch,
             static_cast<Eigen::Index>(P));
    ym.noalias() = wm * cm;
    for (int oc = 0; oc < out_ch; ++oc) ym.row(oc).array() += b[static_cast<std::size_t>(oc)];
  }
  return y;
}

Tensor Conv2d::apply(const Tensor& x) const { return run(x); }

Tensor Conv2d::forward(const Tensor& x) {
  cached_x_ = x;
  return run(x);
}

Tensor Conv2d::backward(const Tensor& dy) {
  const Tensor& x = cached_x_;
  const int oh = dy.h, ow = dy.w;
  const std::size_t K = static_cast<std::size_t>(in_ch) * ksize * ksize;
  const std::size_t P = static_cast<std::size_t>(oh) * ow;
  Tensor dx = Tensor::zeros_like(x);
  std::vector<double> col(K * P);
  std::vector<double> dcol(K * P);
  CMapRM wm(w.data(), out_ch, static_cast<Eigen::Index>(K));
  MapRM gwm(gw.data(), out_ch, static_cast<Eigen::Index>(K));
  for (int i = 0; i < x.n; ++i) {
    im2col(x, i, ksize, stride, pad, oh, ow, col.data());
    CMapRM cm(col.data(), static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(P));
    CMapRM dym(dy.v.data() + static_cast<std::size_t>(i) * out_ch * P, out_ch,
               static_cast<Eigen::Index>(P));
    gwm.noalias() += dym * cm.transpose();
    for (int oc = 0; oc < out_ch; ++oc) gb[static_cast<std::size_t>(oc)] += dym.row(oc).sum();
    MapRM dcm(dcol.data(), static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(P));
    dcm.noalias() = wm.transpose() * dym;
    col2im_add(dcol.data(), in_ch, x.h, x.w, ksize, stride, pad, oh, ow,
               dx.v.data() + static_cast<std::size_t>(i) * in_ch * x.plane());
  }
  return dx;
}

void Conv2d::zero_grad() {
  std::fill(gw.begin(), gw.end(), 0.0);
  std::fill(gb.begin(), gb.end(), 0.0);
}

BatchNorm2d::BatchNorm2d(int channels)
    : ch(channels),
      gamma(static_cast<std::size_t>(channels), 1.0),
      beta(static_cast<std::size_t>(channels), 0.0),
      ggamma(static_cast<std::size_t>(channels), 0.0),
      gbeta(static_cast<std::size_t>(channels), 0.0),
      running_mean(static_cast<std::size_t>(channels), 0.0),
      running_var(static_cast<std::size_t>(channels), 1.0) {}

Tensor BatchNorm2d::apply(const Tensor& x) const {
  Tensor y = Tensor::zeros_like(x);
  const std::size_t pl = x.plane();
  for (int c = 0; c < ch; ++c) {
    const double invstd = 1.0 / std::sqrt(running_var[static_cast<std::size_t>(c)] + eps);
    const double mu = running_mean[static_cast<std::size_t>(c)];
    const double g = gamma[static_cast<std::size_t>(c)], bb = beta[static_cast<std::size_t>(c)];
    for (int i = 0; i < x.n; ++i) {
      const double* src = x.v.data() + (static_cast<std::size_t>(i) * ch + c) * pl;
      double* dst = y.v.data() + (static_cast<std::size_t>(i) * ch + c) * pl;
      for (std::size_t k = 0; k < pl; ++k) dst[k] = g * (src[k] - mu) * invstd + bb;
    }
  }
  return y;
}

Tensor BatchNorm2d::forward(const Tensor& x) {
  Tensor y = Tensor::zeros_like(x);
  cached_xhat_ = Tensor::zeros_like(x);
  cached_invstd_.assign(static_cast<std::size_t>(ch), 0.0);
  const std::size_t pl = x.plane();
  const double m = static_cast<double>(x.n) * pl;
  for (int c = 0; c < ch; ++c) {
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < x.n; ++i) {
      const double* src = x.v.data() + (static_cast<std::size_t>(i) * ch + c) * pl;
      for (std::size_t k = 0; k < pl; ++k) {
        sum += src[k];
        sq += src[k] * src[k];
      }
    }
    const double mu = sum / m;
    double var = sq / m - mu * mu;  // biased
    if (var < 0.0) var = 0.0;
    const double invstd = 1.0 / std::sqrt(var + eps);
    cached_invstd_[static_cast<std::size_t>(c)] = invstd;
    running_mean[static_cast<std::size_t>(c)] =
        momentum * running_mean[static_cast<std::size_t>(c)] + (1.0 - momentum) * mu;
    running_var[static_cast<std::size_t>(c)] =
        momentum * running_var[static_cast<std::size_t>(c)] + (1.0 - momentum) * var;
    const double g = gamma[static_cast<std::size_t>(c)], bb = beta[static_cast<std::size_t>(c)];
    for (int i = 0; i < x.n; ++i) {
      const double* src = x.v.data() + (static_cast<std::size_t>(i) * ch + c) * pl;
      double* xh = cached_xhat_.v.data() + (static_cast<std::size_t>(i) * ch + c) * pl;
      double* dst = y.v.data() + (static_cast<std::size_t>(i) * ch + c) * pl;
      for (std::size_t k = 0; k < pl; ++k) {
        xh[k] = (src[k] - mu) * invstd;
        dst[k] = g * xh[k] + bb;
      }
    }
  }
  return y;
}

Tensor BatchNorm2d::backward(const Tensor& dy) {
  const Tensor& xhat = cached_xhat_;
  Tensor dx = Tensor::zeros_like(dy);
  const std::size_t pl = dy.plane();
  const double m = static_cast<double>(dy.n) * pl;
  for (int c = 0; c < ch; ++c) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (int i = 0; i < dy.n; ++i) {
      const double* d = dy.v.data() + (static_cast<std::size_t>(i) * ch + c) * pl;
      const double* xh = xhat.v.data() + (static_cast<std::size_t>(i) * ch + c) * pl;
      for (std::size_t k = 0; k < pl; ++k) {
        sum_dy += d[k];
        sum_dy_xhat += d[k] * xh[k];
      }
    }
    gbeta[static_cast<std::size_t>(c)] += sum_dy;
    ggamma[static_cast<std::size_t>(c)] += sum_dy_xhat;
    const double g = gamma[static_cast<std::size_t>(c)];
    const double invstd = cached_invstd_[static_cast<std::size_t>(c)];
    const double k1 = sum_dy / m, k2 = sum_dy_xhat / m;
    for (int i = 0; i < dy.n; ++i) {
      const double* d = dy.v.data() + (static_cast<std::size_t>(i) * ch + c) * pl;
      const double* xh = xhat.v.data() + (static_cast<std::size_t>(i) * ch + c) * pl;
      double* out = dx.v.data() + (static_cast<std::size_t>(i) * ch + c) * pl;
      for (std::size_t k = 0; k < pl; ++k) {
        out[k] = g * invstd * (d[k] - k1 - xh[k] * k2);
      }
    }
  }
  return dx;
}

void BatchNorm2d::zero_grad() {
  std::fill(ggamma.begin(), ggamma.end(), 0.0);
  std::fill(gbeta.begin(), gbeta.end(), 0.0);
}

Tensor LeakyReLU::apply(const Tensor& x) const {
  Tensor y = x;
  for (double& v : y.v) {
    if (v < 0.0) v *= slope;
  }
  return y;
}

Tensor LeakyReLU::forward(const Tensor& x) {
  cached_x_ = x;
  return apply(x);
}

Tensor LeakyReLU::backward(const Tensor& dy) const {
  Tensor dx = dy;
  for (std::size_t i = 0; i < dx.v.size(); ++i) {
    if (cached_x_.v[i] < 0.0) dx.v[i] *= slope;
  }
  return dx;
}

Tensor Upsample2x::apply(const Tensor& x) const {
  Tensor y(x.n, x.c, x.h * 2, x.w * 2);
  for (int i = 0; i < x.n; ++i) {
    for (int c = 0; c < x.c; ++c) {
      for (int yy = 0; yy < x.h; ++yy) {
        for (int xx = 0; xx < x.w; ++xx) {
          const double v = x.at(i, c, yy, xx);
          y.at(i, c, 2 * yy, 2 * xx) = v;
          y.at(i, c, 2 * yy, 2 * xx + 1) = v;
          y.at(i, c, 2 * yy + 1, 2 * xx) = v;
          y.at(i, c, 2 * yy + 1, 2 * xx + 1) = v;
        }
      }
    }
  }
  return y;
}

Tensor Upsample2x::backward(const Tensor& dy) const {
  Tensor dx(dy.n, dy.c, dy.h / 2, dy.w / 2);
  for (int i = 0; i < dx.n; ++i) {
    for (int c = 0; c < dx.c; ++c) {
      for (int yy = 0; yy < dx.h; ++yy) {
        for (int xx = 0; xx < dx.w; ++xx) {
          dx.at(i, c, yy, xx) = dy.at(i, c, 2 * yy, 2 * xx) + dy.at(i, c, 2 * yy, 2 * xx + 1) +
                                dy.at(i, c, 2 * yy + 1, 2 * xx) +
                                dy.at(i, c, 2 * yy + 1, 2 * xx + 1);
        }
      }
    }
  }
  return dx;
}

Tensor Sigmoid::apply(const Tensor& x) const {
  Tensor y = x;
  for (double& v : y.v) v = 1.0 / (1.0 + std::exp(-v));
  return y;
}

Tensor Sigmoid::forward(const Tensor& x) {
  cached_y_ = apply(x);
  return cached_y_;
}

Tensor Sigmoid::backward(const Tensor& dy) const {
  Tensor dx = dy;
  for (std::size_t i = 0; i < dx.v.size(); ++i) {
    const double y = cached_y_.v[i];
    dx.v[i] *= y * (1.0 - y);
  }
  return dx;
}

}  // namespace lanegen
