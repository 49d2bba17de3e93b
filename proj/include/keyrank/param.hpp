#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "keyrank/mat.hpp"

namespace keyrank {

/// A trainable tensor with a gradient accumulator of identical shape.
struct Parameter {
  std::string name;
  Mat value;
  Mat grad;

  Parameter() = default;
  Parameter(std::string n, int rows, int cols)
      : name(std::move(n)), value(rows, cols), grad(rows, cols) {}

  int rows() const { return value.rows; }
  int cols() const { return value.cols; }
  std::size_t size() const { return value.size(); }

  void zero_grad() { grad.fill(0.0); }
};

inline void zero_grads(const std::vector<Parameter*>& params) {
  for (Parameter* p : params) p->zero_grad();
}

inline std::size_t total_size(const std::vector<Parameter*>& params) {
  std::size_t n = 0;
  for (const Parameter* p : params) n += p->size();
  return n;
}

inline Parameter* find_param(const std::vector<Parameter*>& params, const std::string& name) {
  for (Parameter* p : params) {
    if (p->name == name) return p;
  }
  return nullptr;
}

/// Uniform Glorot-style init, scale sqrt(6 / (fan_in + fan_out)).
inline void init_glorot(Parameter& p, std::mt19937_64& rng) {
  const double fan_in = p.cols();
  const double fan_out = p.rows();
  const double s = std::sqrt(6.0 / std::max(1.0, fan_in + fan_out));
  std::uniform_real_distribution<double> u(-s, s);
  for (double& v : p.value.a) v = u(rng);
}

inline void init_uniform(Parameter& p, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  for (double& v : p.value.a) v = u(rng);
}

}  // namespace keyrank
