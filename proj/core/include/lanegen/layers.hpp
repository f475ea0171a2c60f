#pragma once

#include <vector>

#include "lanegen/rng.hpp"
#include "lanegen/tensor.hpp"

namespace lanegen {

// Trainable layers with explicit forward/backward passes.
//
// Two entry points each: apply() is the read-only evaluation pass (safe to
// call concurrently on frozen parameters), forward() is the training pass
// that caches whatever backward() needs. backward() accumulates parameter
// gradients and returns the gradient w.r.t. the layer input.

struct Conv2d {
  int in_ch = 0, out_ch = 0, ksize = 0, stride = 1, pad = 0;
  std::vector<double> w;  // out_ch * in_ch * ksize * ksize
  std::vector<double> b;  // out_ch
  std::vector<double> gw, gb;

  Conv2d() = default;
  Conv2d(int in, int out, int k, int s, int p);

  // Kaiming-style init; gain depends on the following activation.
  void init(Rng& rng, double gain);

  int out_size(int in_size) const { return (in_size + 2 * pad - ksize) / stride + 1; }

  Tensor apply(const Tensor& x) const;
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);
  void zero_grad();
  std::size_t param_count() const { return w.size() + b.size(); }

 private:
  Tensor cached_x_;
  Tensor run(const Tensor& x) const;
};

struct BatchNorm2d {
  int ch = 0;
  double momentum = 0.9;  // running = momentum * running + (1 - momentum) * batch
  double eps = 1e-5;
  std::vector<double> gamma, beta, ggamma, gbeta;
  std::vector<double> running_mean, running_var;

  BatchNorm2d() = default;
  explicit BatchNorm2d(int channels);

  Tensor apply(const Tensor& x) const;  // running statistics
  Tensor forward(const Tensor& x);      // batch statistics, updates running
  Tensor backward(const Tensor& dy);
  void zero_grad();
  std::size_t param_count() const { return gamma.size() + beta.size(); }

 private:
  Tensor cached_xhat_;
  std::vector<double> cached_invstd_;
};

struct LeakyReLU {
  double slope = 0.2;

  LeakyReLU() = default;
  explicit LeakyReLU(double s) : slope(s) {}

  Tensor apply(const Tensor& x) const;
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy) const;

 private:
  Tensor cached_x_;
};

// Nearest-neighbor 2x upsampling. Stateless, so the training pass is the
// same as the evaluation pass.
struct Upsample2x {
  Tensor apply(const Tensor& x) const;
  Tensor forward(const Tensor& x) const { return apply(x); }
  Tensor backward(const Tensor& dy) const;
};

struct Sigmoid {
  Tensor apply(const Tensor& x) const;
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy) const;

 private:
  Tensor cached_y_;
};

}  // namespace lanegen
