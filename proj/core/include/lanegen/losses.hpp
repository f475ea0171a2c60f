#pragma once

#include "lanegen/image.hpp"
#include "lanegen/tensor.hpp"

namespace lanegen {

struct LossWeights {
  double lambda_mse = 100.0;  // reconstruction-dominant by default
  double lambda_adv = 1.0;

  void validate() const;  // ConfigError on negative weights
};

struct LossBreakdown {
  double l_mse = 0.0;
  double l_adv = 0.0;
  double l_total_g = 0.0;
  double l_d = 0.0;
  double lambda_mse = 0.0;
  double lambda_adv = 0.0;
};

// Mean over pixels of the squared channel-vector difference. N is the pixel
// count (batch * height * width); the channel norm is summed, not averaged.
double generative_loss(const Tensor& generated, const Tensor& target);
double generative_loss(const RgbImage& generated, const RgbImage& target);
// d l_mse / d generated = 2 (generated - target) / N_pixels.
Tensor generative_loss_grad(const Tensor& generated, const Tensor& target);

// Mean over score-map elements of (1 - s)^2; 0 when the discriminator is
// fully fooled, 1 at maximum penalty.
double adversarial_loss_g(const Tensor& scores);
Tensor adversarial_loss_g_grad(const Tensor& scores);

// mean((1 - real)^2) + mean(fake^2): soft squared-error targets on both
// halves, mirroring the generator-side term.
double discriminator_loss(const Tensor& real_scores, const Tensor& fake_scores);
Tensor discriminator_loss_grad_real(const Tensor& real_scores);
Tensor discriminator_loss_grad_fake(const Tensor& fake_scores);

// l_total_g = lambda_mse * l_mse + lambda_adv * l_adv, exact by construction.
LossBreakdown total_generator_loss(double l_mse, double l_adv, const LossWeights& weights);

}  // namespace lanegen
