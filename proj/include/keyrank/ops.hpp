#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "keyrank/mat.hpp"
#include "keyrank/param.hpp"

namespace keyrank {

// ---------------------------------------------------------------------------
// Raw kernels. W is out_dim x in_dim row-major; backward calls accumulate.
// ---------------------------------------------------------------------------

inline void affine(const double* w, const double* bias, const double* x, double* y,
                   int out_dim, int in_dim) {
  for (int r = 0; r < out_dim; ++r) {
    const double* wr = w + static_cast<std::size_t>(r) * in_dim;
    double s = bias ? bias[r] : 0.0;
    for (int c = 0; c < in_dim; ++c) s += wr[c] * x[c];
    y[r] = s;
  }
}

/// Accumulates into gw, gb, gx; gb or gx may be null.
inline void affine_backward(const double* w, const double* x, const double* gy,
                            double* gw, double* gb, double* gx, int out_dim, int in_dim) {
  for (int r = 0; r < out_dim; ++r) {
    const double g = gy[r];
    if (g == 0.0) continue;
    const double* wr = w + static_cast<std::size_t>(r) * in_dim;
    double* gwr = gw + static_cast<std::size_t>(r) * in_dim;
    for (int c = 0; c < in_dim; ++c) gwr[c] += g * x[c];
    if (gb) gb[r] += g;
    if (gx) {
      for (int c = 0; c < in_dim; ++c) gx[c] += g * wr[c];
    }
  }
}

inline void relu(const double* pre, double* post, int n) {
  for (int i = 0; i < n; ++i) post[i] = pre[i] > 0.0 ? pre[i] : 0.0;
}

/// gpre accumulates gpost masked by the sign of pre (subgradient 0 at 0).
inline void relu_backward(const double* pre, const double* gpost, double* gpre, int n) {
  for (int i = 0; i < n; ++i) {
    if (pre[i] > 0.0) gpre[i] += gpost[i];
  }
}

inline void tanh_inplace(double* x, int n) {
  for (int i = 0; i < n; ++i) x[i] = std::tanh(x[i]);
}

/// post = tanh(pre) must be supplied; gpre accumulates gpost * (1 - post^2).
inline void tanh_backward(const double* post, const double* gpost, double* gpre, int n) {
  for (int i = 0; i < n; ++i) gpre[i] += gpost[i] * (1.0 - post[i] * post[i]);
}

// ---------------------------------------------------------------------------
// Vector-level operations.
// ---------------------------------------------------------------------------

/// y = W x + b.
inline Vec dense(const Mat& W, const Vec& b, const Vec& x) {
  if (W.cols != static_cast<int>(x.size()))
    throw DimensionError(cat("dense: W is ", W.rows, "x", W.cols, " but x has ", x.size()));
  if (W.rows != static_cast<int>(b.size()))
    throw DimensionError(cat("dense: W has ", W.rows, " rows but b has ", b.size()));
  Vec y(W.rows);
  affine(W.a.data(), b.data(), x.data(), y.data(), W.rows, W.cols);
  return y;
}

inline void dense_backward(const Mat& W, const Vec& x, const Vec& gy, Mat& gW, Vec& gb, Vec& gx) {
  affine_backward(W.a.data(), x.data(), gy.data(), gW.a.data(), gb.data(), gx.data(), W.rows,
                  W.cols);
}

/// Numerically stable softmax; entries positive, sum 1.
inline Vec softmax(const Vec& logits) {
  if (logits.empty()) throw DimensionError("softmax: empty input");
  const double mx = *std::max_element(logits.begin(), logits.end());
  Vec p(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

/// -ln p[label], probability floored at 1e-12.
inline double cross_entropy(const Vec& probs, int label) {
  if (label < 0 || label >= static_cast<int>(probs.size()))
    throw DimensionError(cat("cross_entropy: label ", label, " out of range ", probs.size()));
  return -std::log(std::max(probs[label], 1e-12));
}

/// Gradient of cross_entropy(softmax(logits), label) w.r.t. the logits.
inline void softmax_ce_backward(const Vec& probs, int label, double g, Vec& glogits) {
  for (std::size_t i = 0; i < probs.size(); ++i) {
    glogits[i] += g * (probs[i] - (static_cast<int>(i) == label ? 1.0 : 0.0));
  }
}

inline double hinge_pair_loss(double s_pos, double s_neg, double margin) {
  return std::max(0.0, margin - s_pos + s_neg);
}

/// Subgradients are exactly 0 when the margin is strictly satisfied.
inline void hinge_pair_backward(double s_pos, double s_neg, double margin, double g,
                                double& g_pos, double& g_neg) {
  if (margin - s_pos + s_neg > 0.0) {
    g_pos -= g;
    g_neg += g;
  }
}

inline double triplet_loss(double s_pos, double s_neg, double margin) {
  return std::max(0.0, s_neg - s_pos + margin);
}

inline void triplet_backward(double s_pos, double s_neg, double margin, double g, double& g_pos,
                             double& g_neg) {
  if (s_neg - s_pos + margin > 0.0) {
    g_pos -= g;
    g_neg += g;
  }
}

/// KL(N(mu, diag(sigma^2)) || N(0, I)) in closed form.
inline double gaussian_kl(const Vec& mu, const Vec& sigma) {
  if (mu.size() != sigma.size())
    throw DimensionError(cat("gaussian_kl: mu has ", mu.size(), " dims, sigma ", sigma.size()));
  double kl = 0.0;
  for (std::size_t j = 0; j < mu.size(); ++j) {
    if (!(sigma[j] > 0.0)) throw DomainError(cat("gaussian_kl: sigma[", j, "] = ", sigma[j]));
    const double s2 = sigma[j] * sigma[j];
    kl += 0.5 * (s2 + mu[j] * mu[j] - 1.0 - std::log(s2));
  }
  return kl;
}

inline void gaussian_kl_backward(const Vec& mu, const Vec& sigma, double g, Vec& gmu,
                                 Vec& gsigma) {
  for (std::size_t j = 0; j < mu.size(); ++j) {
    gmu[j] += g * mu[j];
    gsigma[j] += g * (sigma[j] - 1.0 / sigma[j]);
  }
}

/// z = mu + sigma (.) eps.
inline Vec reparameterize(const Vec& mu, const Vec& sigma, const Vec& eps) {
  if (mu.size() != sigma.size() || mu.size() != eps.size())
    throw DimensionError("reparameterize: mismatched dims");
  Vec z(mu.size());
  for (std::size_t j = 0; j < mu.size(); ++j) z[j] = mu[j] + sigma[j] * eps[j];
  return z;
}

inline void reparameterize_backward(const Vec& eps, const Vec& gz, Vec& gmu, Vec& gsigma) {
  for (std::size_t j = 0; j < gz.size(); ++j) {
    gmu[j] += gz[j];
    gsigma[j] += gz[j] * eps[j];
  }
}

/// Mean squared error over dimensions.
inline double mse(const Vec& x, const Vec& y) {
  if (x.size() != y.size()) throw DimensionError("mse: mismatched dims");
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double d = y[j] - x[j];
    s += d * d;
  }
  return s / static_cast<double>(x.size());
}

/// Accumulates d mse / d y into gy and d mse / d x into gx.
inline void mse_backward(const Vec& x, const Vec& y, double g, Vec& gx, Vec& gy) {
  const double inv = 2.0 * g / static_cast<double>(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double d = y[j] - x[j];
    gy[j] += inv * d;
    gx[j] -= inv * d;
  }
}

}  // namespace keyrank
