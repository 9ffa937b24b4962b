#pragma once

#include <cmath>
#include <vector>

#include "sgm/error.hpp"
#include "sgm/tensor.hpp"

namespace sgm {

// Plain Adam over a fixed set of parameter tensors. Parameters are updated
// in place; the caller owns them and rebuilds the tape each step.
class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(std::vector<Tensor*>& params, const std::vector<Tensor>& grads) {
    if (params.size() != grads.size()) {
      throw DataError("Adam::step: parameter/gradient count mismatch");
    }
    if (m_.empty()) {
      for (const Tensor* p : params) {
        m_.push_back(Tensor::zeros(p->shape()));
        v_.push_back(Tensor::zeros(p->shape()));
      }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (std::size_t k = 0; k < params.size(); ++k) {
      Tensor& p = *params[k];
      const Tensor& g = grads[k];
      for (std::size_t i = 0; i < p.numel(); ++i) {
        m_[k](i) = beta1_ * m_[k](i) + (1.0 - beta1_) * g(i);
        v_[k](i) = beta2_ * v_[k](i) + (1.0 - beta2_) * g(i) * g(i);
        const double mhat = m_[k](i) / bc1;
        const double vhat = v_[k](i) / bc2;
        p(i) -= lr_ * mhat / (std::sqrt(vhat) + eps_);
      }
      p.check_finite("Adam::step");
    }
  }

  void set_lr(double lr) { lr_ = lr; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Tensor> m_, v_;
};

}  // namespace sgm
