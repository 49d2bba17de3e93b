#include <doctest.h>

#include <random>

#include "keyrank/adamw.hpp"

using namespace keyrank;

TEST_CASE("adamw: one hand-computed bias-corrected step") {
  Parameter p("p", 1, 1);
  p.value.a[0] = 1.0;
  p.grad.a[0] = 1.0;
  AdamWConfig cfg;
  cfg.weight_decay = 0.0;
  AdamW opt({&p}, cfg);
  opt.step(0.1);
  // m_hat = v_hat = 1 at t=1, so the update is lr / (1 + eps).
  CHECK(p.value.a[0] == doctest::Approx(0.9).epsilon(1e-8));
  CHECK(opt.step_count() == 1);
}

TEST_CASE("adamw: zero gradient leaves value unchanged without decay") {
  Parameter p("p", 2, 1);
  p.value.a = {0.5, -1.5};
  AdamWConfig cfg;
  cfg.weight_decay = 0.0;
  AdamW opt({&p}, cfg);
  opt.step(0.1);
  CHECK(p.value.a[0] == doctest::Approx(0.5));
  CHECK(p.value.a[1] == doctest::Approx(-1.5));
}

TEST_CASE("adamw: decoupled decay scales the value directly") {
  Parameter p("p", 1, 1);
  p.value.a[0] = 2.0;
  AdamWConfig cfg;
  cfg.weight_decay = 0.1;
  AdamW opt({&p}, cfg);
  opt.step(0.1);
  CHECK(p.value.a[0] == doctest::Approx(2.0 * (1.0 - 0.01)));
}

TEST_CASE("adamw: identical inputs produce bitwise-identical trajectories") {
  auto run = [] {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Parameter p("p", 4, 3);
    for (double& v : p.value.a) v = u(rng);
    AdamW opt({&p});
    for (int t = 0; t < 25; ++t) {
      for (double& g : p.grad.a) g = u(rng);
      opt.step(0.01);
    }
    return p.value.a;
  };
  const auto a = run();
  const auto b = run();
  CHECK(a == b);
}
