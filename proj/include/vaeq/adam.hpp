#pragma once

// Adam with bias correction over a flat parameter vector.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace vaeq {

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  explicit Adam(std::size_t n) : m_(n, 0.0), v_(n, 0.0) {}

  std::size_t steps() const { return t_; }

  void step(std::vector<double>& params, const std::vector<double>& grads,
            const AdamConfig& cfg) {
    if (params.size() != m_.size() || grads.size() != m_.size())
      throw std::invalid_argument("Adam::step: size mismatch");
    ++t_;
    const double corr1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t_));
    const double corr2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = cfg.beta1 * m_[i] + (1.0 - cfg.beta1) * grads[i];
      v_[i] = cfg.beta2 * v_[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
      const double mhat = m_[i] / corr1;
      const double vhat = v_[i] / corr2;
      params[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }

 private:
  std::vector<double> m_, v_;
  std::size_t t_ = 0;
};

}  // namespace vaeq
