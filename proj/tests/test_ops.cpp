#include <doctest.h>

#include <cmath>
#include <random>

#include "keyrank/grad_check.hpp"
#include "keyrank/ops.hpp"

using namespace keyrank;

namespace {

Vec rand_vec(std::size_t n, std::mt19937_64& rng, double lo = -2.0, double hi = 2.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vec v(n);
  for (double& x : v) x = u(rng);
  return v;
}

/// Independent KL(q || p) estimator: average of log q(x) - log p(x) over
/// samples x ~ q, with its standard error.
struct McKl {
  double mean = 0.0;
  double se = 0.0;
};

McKl mc_gaussian_kl(const Vec& mu, const Vec& sigma, int samples, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  double sum = 0.0, sum_sq = 0.0;
  for (int s = 0; s < samples; ++s) {
    double term = 0.0;
    for (std::size_t j = 0; j < mu.size(); ++j) {
      const double x = mu[j] + sigma[j] * normal(rng);
      const double zq = (x - mu[j]) / sigma[j];
      const double log_q = -0.5 * zq * zq - std::log(sigma[j]);
      const double log_p = -0.5 * x * x;
      term += log_q - log_p;
    }
    sum += term;
    sum_sq += term * term;
  }
  McKl out;
  out.mean = sum / samples;
  const double var = (sum_sq / samples - out.mean * out.mean) / (samples - 1);
  out.se = std::sqrt(std::max(0.0, var));
  return out;
}

}  // namespace

TEST_CASE("dense: closed forms and shape errors") {
  Mat w(1, 2);
  w(0, 0) = 2.0;
  w(0, 1) = -1.0;
  CHECK(dense(w, Vec{0.5}, Vec{1.0, 0.0})[0] == doctest::Approx(2.5));

  Mat zero(3, 2);
  const Vec b{1.0, -2.0, 0.25};
  CHECK(dense(zero, b, Vec{9.0, -3.0}) == b);

  CHECK_THROWS_AS(dense(w, Vec{0.5}, Vec{1.0, 0.0, 3.0}), DimensionError);
  CHECK_THROWS_AS(dense(w, Vec{0.5, 0.5}, Vec{1.0, 0.0}), DimensionError);
}

TEST_CASE("dense: gradients match central differences") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 10; ++rep) {
    const int q = 3, p = 4;
    Parameter W("W", q, p), b("b", q, 1), x("x", p, 1);
    W.value.a = rand_vec(W.size(), rng);
    b.value.a = rand_vec(q, rng);
    x.value.a = rand_vec(p, rng);
    const Vec r = rand_vec(q, rng);
    auto loss = [&] {
      const Vec y = dense(W.value, b.value.a, x.value.a);
      double s = 0.0;
      for (int i = 0; i < q; ++i) s += r[i] * y[i];
      return s;
    };
    zero_grads({&W, &b, &x});
    dense_backward(W.value, x.value.a, r, W.grad, b.grad.a, x.grad.a);
    const auto report = check_all_params({&W, &b, &x}, loss, 1e-4);
    CHECK(report.max_rel_err <= 1e-6);
  }
}

TEST_CASE("softmax: symmetry, closed form, stability, normalization") {
  const Vec p0 = softmax(Vec{0.0, 0.0});
  CHECK(p0[0] == doctest::Approx(0.5));
  CHECK(p0[1] == doctest::Approx(0.5));

  const Vec p1 = softmax(Vec{std::log(3.0), 0.0});
  CHECK(p1[0] == doctest::Approx(0.75));
  CHECK(p1[1] == doctest::Approx(0.25));

  const Vec p2 = softmax(Vec{1000.0, 0.0});
  CHECK(std::isfinite(p2[0]));
  CHECK(p2[0] == doctest::Approx(1.0));
  CHECK(p2[1] == doctest::Approx(0.0));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> shift(-50.0, 50.0);
  for (int rep = 0; rep < 50; ++rep) {
    const Vec x = rand_vec(6, rng, -10.0, 10.0);
    const Vec p = softmax(x);
    double total = 0.0;
    for (const double v : p) {
      CHECK(v > 0.0);
      total += v;
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);
    Vec shifted = x;
    const double c = shift(rng);
    for (double& v : shifted) v += c;
    const Vec ps = softmax(shifted);
    for (std::size_t i = 0; i < p.size(); ++i)
      CHECK(ps[i] == doctest::Approx(p[i]).epsilon(1e-12));
  }
}

TEST_CASE("cross_entropy: closed forms and gradient") {
  CHECK(cross_entropy(Vec{0.75, 0.25}, 0) == doctest::Approx(0.287682).epsilon(1e-5));
  CHECK(cross_entropy(Vec{1.0, 0.0}, 0) == doctest::Approx(0.0));
  CHECK_THROWS_AS(cross_entropy(Vec{1.0}, 3), DimensionError);

  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 10; ++rep) {
    Parameter logits("logits", 4, 1);
    logits.value.a = rand_vec(4, rng);
    const int label = static_cast<int>(rng() % 4);
    auto loss = [&] { return cross_entropy(softmax(logits.value.a), label); };
    CHECK(loss() >= 0.0);
    logits.zero_grad();
    softmax_ce_backward(softmax(logits.value.a), label, 1.0, logits.grad.a);
    CHECK(check_all_params({&logits}, loss, 1e-4).max_rel_err <= 1e-6);
  }
}

TEST_CASE("hinge_pair_loss: closed forms and strict-margin subgradient") {
  CHECK(hinge_pair_loss(2.0, 0.5, 1.0) == doctest::Approx(0.0));
  CHECK(hinge_pair_loss(0.3, 0.5, 1.0) == doctest::Approx(1.2));
  CHECK(hinge_pair_loss(0.5, 0.5, 1.0) == doctest::Approx(1.0));

  double gp = 0.0, gn = 0.0;
  hinge_pair_backward(2.0, 0.5, 1.0, 1.0, gp, gn);
  CHECK(gp == 0.0);
  CHECK(gn == 0.0);
  hinge_pair_backward(0.3, 0.5, 1.0, 1.0, gp, gn);
  CHECK(gp == -1.0);
  CHECK(gn == 1.0);
}

TEST_CASE("triplet_loss: closed forms and strict-margin subgradient") {
  CHECK(triplet_loss(3.0, 0.0, 1.0) == doctest::Approx(0.0));
  CHECK(triplet_loss(0.0, 0.0, 1.0) == doctest::Approx(1.0));
  CHECK(triplet_loss(-1.0, 0.5, 1.0) == doctest::Approx(2.5));

  double gp = 0.0, gn = 0.0;
  triplet_backward(3.0, 0.0, 1.0, 1.0, gp, gn);
  CHECK(gp == 0.0);
  CHECK(gn == 0.0);
}

TEST_CASE("gaussian_kl: closed forms, domain, zero iff prior") {
  CHECK(gaussian_kl(Vec{0.0, 0.0}, Vec{1.0, 1.0}) == doctest::Approx(0.0));
  CHECK(gaussian_kl(Vec{1.0}, Vec{1.0}) == doctest::Approx(0.5));
  CHECK(gaussian_kl(Vec{0.0}, Vec{2.0}) == doctest::Approx(0.806853).epsilon(1e-5));
  CHECK_THROWS_AS(gaussian_kl(Vec{0.0}, Vec{0.0}), DomainError);
  CHECK_THROWS_AS(gaussian_kl(Vec{0.0}, Vec{-1.0}), DomainError);

  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 50; ++rep) {
    const Vec mu = rand_vec(3, rng, -1.0, 1.0);
    const Vec sigma = rand_vec(3, rng, 0.3, 2.5);
    const double kl = gaussian_kl(mu, sigma);
    CHECK(kl >= 0.0);
    bool at_prior = true;
    for (std::size_t j = 0; j < mu.size(); ++j)
      at_prior = at_prior && std::abs(mu[j]) < 1e-12 && std::abs(sigma[j] - 1.0) < 1e-12;
    if (!at_prior) CHECK(kl > 1e-12);
  }
}

TEST_CASE("gaussian_kl: Monte-Carlo oracle within 3 standard errors") {
  std::mt19937_64 rng(31);
  const McKl est = mc_gaussian_kl(Vec{0.0}, Vec{2.0}, 100000, rng);
  CHECK(std::abs(est.mean - 0.806853) <= 3.0 * est.se);

  for (int rep = 0; rep < 5; ++rep) {
    const Vec m = rand_vec(2, rng, -2.0, 2.0);
    const Vec s = rand_vec(2, rng, 0.4, 2.0);
    const McKl e = mc_gaussian_kl(m, s, 100000, rng);
    CHECK(std::abs(e.mean - gaussian_kl(m, s)) <= 3.0 * e.se);
  }
}

TEST_CASE("reparameterize: closed forms and sampling statistics") {
  CHECK(reparameterize(Vec{0.5}, Vec{2.0}, Vec{1.0})[0] == doctest::Approx(2.5));
  CHECK(reparameterize(Vec{0.7}, Vec{3.0}, Vec{0.0})[0] == doctest::Approx(0.7));

  std::mt19937_64 rng(37);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double mu = -0.8, sigma = 1.7;
  const int n = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int s = 0; s < n; ++s) {
    const double z = reparameterize(Vec{mu}, Vec{sigma}, Vec{normal(rng)})[0];
    sum += z;
    sum_sq += z * z;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  const double se_mean = sigma / std::sqrt(static_cast<double>(n));
  const double se_var = sigma * sigma * std::sqrt(2.0 / (n - 1));
  CHECK(std::abs(mean - mu) <= 3.0 * se_mean);
  CHECK(std::abs(var - sigma * sigma) <= 3.0 * se_var);
}

TEST_CASE("mse: value and two-sided gradient") {
  CHECK(mse(Vec{1.0, 1.0, 1.0, 1.0}, Vec{0.0, 0.0, 0.0, 0.0}) == doctest::Approx(1.0));
  std::mt19937_64 rng(41);
  Parameter x("x", 5, 1), y("y", 5, 1);
  x.value.a = rand_vec(5, rng);
  y.value.a = rand_vec(5, rng);
  auto loss = [&] { return mse(x.value.a, y.value.a); };
  zero_grads({&x, &y});
  mse_backward(x.value.a, y.value.a, 1.0, x.grad.a, y.grad.a);
  CHECK(check_all_params({&x, &y}, loss, 1e-4).max_rel_err <= 1e-6);
}

TEST_CASE("grad_check: quadratic exactness and constant function") {
  const auto quad = grad_check([](const Vec& v) { return v[0] * v[0]; }, Vec{3.0}, Vec{6.0}, 1e-3);
  CHECK(quad.max_rel_err <= 1e-9);

  const auto constant = grad_check([](const Vec&) { return 2.5; }, Vec{0.3, -0.4}, Vec{0.0, 0.0});
  CHECK(constant.max_rel_err == doctest::Approx(0.0));
}
