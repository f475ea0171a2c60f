#include "lanegen/losses.hpp"

#include <sstream>

#include "lanegen/error.hpp"

namespace lanegen {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b)) {
    std::ostringstream os;
    os << what << ": shape mismatch " << a.shape_str() << " vs " << b.shape_str();
    throw ValidationError(os.str());
  }
}

}  // namespace

void LossWeights::validate() const {
  if (lambda_mse < 0.0 || lambda_adv < 0.0) throw ConfigError("loss weights must be nonnegative");
}

double generative_loss(const Tensor& generated, const Tensor& target) {
  require_same_shape(generated, target, "generative_loss");
  double acc = 0.0;
  for (std::size_t i = 0; i < generated.v.size(); ++i) {
    const double d = generated.v[i] - target.v[i];
    acc += d * d;
  }
  const double n_pixels = static_cast<double>(generated.n) * generated.plane();
  return acc / n_pixels;
}

double generative_loss(const RgbImage& generated, const RgbImage& target) {
  if (!generated.same_size(target)) {
    std::ostringstream os;
    os << "generative_loss: image size mismatch " << generated.height << "x" << generated.width
       << " vs " << target.height << "x" << target.width;
    throw ValidationError(os.str());
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < generated.data.size(); ++i) {
    const double d = generated.data[i] - target.data[i];
    acc += d * d;
  }
  return acc / static_cast<double>(generated.pixel_count());
}

Tensor generative_loss_grad(const Tensor& generated, const Tensor& target) {
  require_same_shape(generated, target, "generative_loss_grad");
  const double n_pixels = static_cast<double>(generated.n) * generated.plane();
  Tensor g = Tensor::zeros_like(generated);
  for (std::size_t i = 0; i < g.v.size(); ++i)
    g.v[i] = 2.0 * (generated.v[i] - target.v[i]) / n_pixels;
  return g;
}

double adversarial_loss_g(const Tensor& scores) {
  double acc = 0.0;
  for (double s : scores.v) {
    const double d = 1.0 - s;
    acc += d * d;
  }
  return acc / static_cast<double>(scores.v.size());
}

Tensor adversarial_loss_g_grad(const Tensor& scores) {
  const double m = static_cast<double>(scores.v.size());
  Tensor g = Tensor::zeros_like(scores);
  for (std::size_t i = 0; i < g.v.size(); ++i) g.v[i] = -2.0 * (1.0 - scores.v[i]) / m;
  return g;
}

double discriminator_loss(const Tensor& real_scores, const Tensor& fake_scores) {
  require_same_shape(real_scores, fake_scores, "discriminator_loss");
  double real_acc = 0.0, fake_acc = 0.0;
  for (double s : real_scores.v) {
    const double d = 1.0 - s;
    real_acc += d * d;
  }
  for (double s : fake_scores.v) fake_acc += s * s;
  const double m = static_cast<double>(real_scores.v.size());
  return real_acc / m + fake_acc / m;
}

Tensor discriminator_loss_grad_real(const Tensor& real_scores) {
  const double m = static_cast<double>(real_scores.v.size());
  Tensor g = Tensor::zeros_like(real_scores);
  for (std::size_t i = 0; i < g.v.size(); ++i) g.v[i] = -2.0 * (1.0 - real_scores.v[i]) / m;
  return g;
}

Tensor discriminator_loss_grad_fake(const Tensor& fake_scores) {
  const double m = static_cast<double>(fake_scores.v.size());
  Tensor g = Tensor::zeros_like(fake_scores);
  for (std::size_t i = 0; i < g.v.size(); ++i) g.v[i] = 2.0 * fake_scores.v[i] / m;
  return g;
}

LossBreakdown total_generator_loss(double l_mse, double l_adv, const LossWeights& weights) {
  weights.validate();
  LossBreakdown b;
  b.l_mse = l_mse;
  b.l_adv = l_adv;
  b.lambda_mse = weights.lambda_mse;
  b.lambda_adv = weights.lambda_adv;
  b.l_total_g = weights.lambda_mse * l_mse + weights.lambda_adv * l_adv;
  return b;
}

}  // namespace lanegen
