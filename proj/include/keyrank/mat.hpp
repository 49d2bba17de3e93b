#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "keyrank/common.hpp"

namespace keyrank {

using Vec = std::vector<double>;

/// Dense row-major matrix of doubles. Vectors are stored as n x 1.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c, double fill = 0.0)
      : rows(r), cols(c), a(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {}

  double* row(int r) { return a.data() + static_cast<std::size_t>(r) * cols; }
  const double* row(int r) const { return a.data() + static_cast<std::size_t>(r) * cols; }

  double& operator()(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }

  std::size_t size() const { return a.size(); }
  void fill(double v) { std::fill(a.begin(), a.end(), v); }
};

inline bool all_finite(const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i])) return false;
  }
  return true;
}

inline bool all_finite(const Vec& v) { return all_finite(v.data(), v.size()); }
inline bool all_finite(const Mat& m) { return all_finite(m.a.data(), m.a.size()); }

inline void require_finite(const Vec& v, const std::string& what) {
  if (!all_finite(v)) throw DomainError(cat("non-finite values in ", what));
}

inline void require_finite(const Mat& m, const std::string& what) {
  if (!all_finite(m)) throw DomainError(cat("non-finite values in ", what));
}

}  // namespace keyrank
