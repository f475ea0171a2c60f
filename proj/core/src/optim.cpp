#include "lanegen/optim.hpp"

#include <cmath>

#include "lanegen/error.hpp"

namespace lanegen {

void Adam::attach(const std::vector<ParamTensor>& params) {
  t_ = 0;
  m_.assign(params.size(), {});
  v_.assign(params.size(), {});
  for (std::size_t j = 0; j < params.size(); ++j) {
    m_[j].assign(params[j].value->size(), 0.0);
    v_[j].assign(params[j].value->size(), 0.0);
  }
}

void Adam::step(const std::vector<ParamTensor>& params) {
  if (m_.size() != params.size())
    throw ValidationError("Adam::step called with a parameter list it was not attached to");
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t j = 0; j < params.size(); ++j) {
    std::vector<double>& p = *params[j].value;
    const std::vector<double>& g = *params[j].grad;
    std::vector<double>& m = m_[j];
    std::vector<double>& v = v_[j];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

}  // namespace lanegen
