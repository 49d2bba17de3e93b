#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "keyrank/param.hpp"

namespace keyrank {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;
};

/// Bias-corrected AdamW with decoupled weight decay applied to the value.
class AdamW {
 public:
  explicit AdamW(std::vector<Parameter*> params, AdamWConfig cfg = {})
      : params_(std::move(params)), cfg_(cfg) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const Parameter* p : params_) {
      m_.emplace_back(p->size(), 0.0);
      v_.emplace_back(p->size(), 0.0);
    }
  }

  void step(double lr) {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
      Parameter& p = *params_[i];
      std::vector<double>& m = m_[i];
      std::vector<double>& v = v_[i];
      for (std::size_t j = 0; j < p.size(); ++j) {
        const double g = p.grad.a[j];
        m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g;
        v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g * g;
        const double m_hat = m[j] / bc1;
        const double v_hat = v[j] / bc2;
        p.value.a[j] -= lr * (m_hat / (std::sqrt(v_hat) + cfg_.epsilon) +
                              cfg_.weight_decay * p.value.a[j]);
      }
    }
  }

  long step_count() const { return t_; }
  const AdamWConfig& config() const { return cfg_; }

 private:
  std::vector<Parameter*> params_;
  AdamWConfig cfg_;
  std::vector<std::vector<double>> m_, v_;
  long t_ = 0;
};

}  // namespace keyrank
