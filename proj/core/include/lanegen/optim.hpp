#pragma once

#include <cstdint>
#include <vector>

#include "lanegen/model.hpp"

namespace lanegen {

struct AdamConfig {
  double lr = 0.0002;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// ADAM with bias correction. Moment vectors are laid out parallel to the
// parameter list handed to attach(); full state is exposed so checkpoints
// can round-trip training exactly.
class Adam {
 public:
  Adam() = default;
  explicit Adam(const AdamConfig& cfg) : cfg_(cfg) {}

  void attach(const std::vector<ParamTensor>& params);
  void step(const std::vector<ParamTensor>& params);

  const AdamConfig& config() const { return cfg_; }
  std::int64_t t() const { return t_; }
  void set_t(std::int64_t t) { t_ = t; }
  std::vector<std::vector<double>>& m() { return m_; }
  std::vector<std::vector<double>>& v() { return v_; }

 private:
  AdamConfig cfg_;
  std::int64_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace lanegen
