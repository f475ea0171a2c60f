#pragma once

#include <set>
#include <string>
#include <vector>

#include "lanegen/layers.hpp"
#include "lanegen/rng.hpp"
#include "lanegen/tensor.hpp"

namespace lanegen {

// Low-resolution map of per-region realness scores in [0, 1].
using FeatureScoreMap = Tensor;

struct ArchConfig {
  int image_size = 64;
  int base_channels = 16;
  int depth = 4;
  double leaky_slope = 0.2;
  std::set<int> skip_levels;  // subset of {1 .. depth-1}

  // Throws ConfigError on violated invariants.
  void validate() const;

  // Encoder output channels at level l: base * 2^l, capped at 8 * base.
  int enc_channels(int level) const;
  // Decoder output channels at level l (mirrored).
  int dec_channels(int level) const;
  // Spatial size of the discriminator score map.
  int score_map_size() const;

  // All eligible levels receive skip conditioning by default.
  static std::set<int> all_skips(int depth);

  // CPU-minutes scale: trains in minutes at 64x64.
  static ArchConfig desk_default();
  // Full-scale preset; built for parameter-count reporting, not desk training.
  static ArchConfig paper_preset();

  bool operator==(const ArchConfig& o) const;
};

// Named view over one parameter vector and its gradient.
struct ParamTensor {
  std::vector<double>* value;
  std::vector<double>* grad;
  std::string name;
};

// Non-trainable state (batch-norm running statistics).
struct BufferTensor {
  std::vector<double>* value;
  std::string name;
};

struct EncBlock {
  Conv2d conv;  // 4x4, stride 2, pad 1: halves the spatial size
  BatchNorm2d bn;
  LeakyReLU act;
};

struct DecBlock {
  Upsample2x up;
  Conv2d conv;  // 3x3, stride 1, pad 1 after upsampling
  BatchNorm2d bn;
  LeakyReLU act;
};

// Encoder + decoder with multi-resolution skip conditioning. Input is the
// 6-channel source|context concatenation; output is a 3-channel image
// squashed into [0, 1] by a final sigmoid.
class Generator {
 public:
  explicit Generator(const ArchConfig& cfg);

  void init(Rng& rng);

  // Evaluation pass: running batch-norm statistics, no caches mutated.
  Tensor infer(const Tensor& x) const;
  // Evaluation pass with selected skip tensors zeroed (perturbation probe).
  Tensor infer_suppressing_skips(const Tensor& x, const std::set<int>& suppressed) const;

  // Training pass: batch statistics, caches activations for backward.
  Tensor forward_train(const Tensor& x);
  // Accumulates parameter gradients; returns the gradient w.r.t. the input.
  Tensor backward(const Tensor& dy);

  void zero_grad();
  std::vector<ParamTensor> params();
  std::vector<BufferTensor> buffers();
  std::size_t param_count() const;
  const ArchConfig& config() const { return cfg_; }

 private:
  ArchConfig cfg_;
  std::vector<EncBlock> enc_;
  std::vector<DecBlock> dec_;  // indexed by level; applied depth-1 .. 0
  Conv2d head_;
  Sigmoid out_act_;
  std::vector<Tensor> cached_enc_out_;

  void check_input(const Tensor& x) const;
  Tensor eval_pass(const Tensor& x, const std::set<int>* suppressed) const;
};

// Encoder-shaped network over candidate|context, ending in a 1-channel
// sigmoid score map ("soft" per-region realness instead of a hard binary).
class Discriminator {
 public:
  explicit Discriminator(const ArchConfig& cfg);

  void init(Rng& rng);

  Tensor infer(const Tensor& x) const;
  Tensor forward_train(const Tensor& x);
  Tensor backward(const Tensor& dy);

  void zero_grad();
  std::vector<ParamTensor> params();
  std::vector<BufferTensor> buffers();
  std::size_t param_count() const;
  const ArchConfig& config() const { return cfg_; }

 private:
  ArchConfig cfg_;
  std::vector<EncBlock> blocks_;
  Conv2d head_;
  Sigmoid out_act_;

  void check_input(const Tensor& x) const;
};

// Stable 64-bit digest over a parameter set (FNV-1a on raw bytes); used for
// reproducibility and resume-equivalence checks.
std::string param_checksum(const std::vector<ParamTensor>& params);

}  // namespace lanegen
