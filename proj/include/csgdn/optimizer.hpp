#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "csgdn/common.hpp"

namespace csgdn {

enum class OptimizerKind { kSgd, kAdam };

inline OptimizerKind parse_optimizer(const std::string& s) {
  if (s == "sgd") return OptimizerKind::kSgd;
  if (s == "adam") return OptimizerKind::kAdam;
  throw ConfigError("unknown optimizer '" + s + "' (expected sgd|adam)");
}

inline const char* to_string(OptimizerKind k) { return k == OptimizerKind::kSgd ? "sgd" : "adam"; }

/// Full-batch first-order updates over a fixed, ordered parameter list.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double lr, double beta1 = 0.9, double beta2 = 0.999,
            double eps = 1e-8)
      : kind_(kind), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
  }

  void step(const std::vector<Matrix*>& params, const std::vector<Matrix>& grads) {
    if (params.size() != grads.size()) throw DimensionError("optimizer: params/grads arity");
    if (kind_ == OptimizerKind::kSgd) {
      for (std::size_t i = 0; i < params.size(); ++i) *params[i] -= lr_ * grads[i];
      return;
    }
    if (m_.empty()) {
      for (const auto* p : params) {
        m_.push_back(Matrix::Zero(p->rows(), p->cols()));
        v_.push_back(Matrix::Zero(p->rows(), p->cols()));
      }
    }
    if (m_.size() != params.size()) throw DimensionError("optimizer: parameter list changed");
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
      v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i].cwiseProduct(grads[i]);
      const auto m_hat = m_[i].array() / bc1;
      const auto v_hat = v_[i].array() / bc2;
      params[i]->array() -= lr_ * m_hat / (v_hat.sqrt() + eps_);
    }
  }

  int steps() const { return t_; }

 private:
  OptimizerKind kind_;
  double lr_, beta1_, beta2_, eps_;
  int t_ = 0;
  std::vector<Matrix> m_, v_;
};

}  // namespace csgdn
