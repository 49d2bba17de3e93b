#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "helpers.hpp"
#include "keyrank/synth.hpp"
#include "keyrank/trainer.hpp"

using namespace keyrank;

TEST_CASE("lr_at: ramp peak, terminal zero, linear warmup") {
  const long total = 200;
  const double base = 1e-3;
  const double wp = 0.10;  // 20 warmup steps
  CHECK(lr_at(20, total, base, wp) == doctest::Approx(base));
  CHECK(lr_at(200, total, base, wp) == doctest::Approx(0.0));
  CHECK(lr_at(10, total, base, wp) == doctest::Approx(base / 2.0));
  CHECK_THROWS_AS(lr_at(0, total, base, wp), ConfigError);
  CHECK_THROWS_AS(lr_at(201, total, base, wp), ConfigError);
}

TEST_CASE("lr_at: piecewise linear, continuous, max equals base") {
  const long total = 137;
  const double base = 2.5e-4;
  const double wp = 0.13;
  double prev = 0.0;
  double peak = 0.0;
  const long warmup = static_cast<long>(std::ceil(wp * total));
  for (long s = 1; s <= total; ++s) {
    const double lr = lr_at(s, total, base, wp);
    CHECK(lr >= 0.0);
    CHECK(lr <= base + 1e-15);
    peak = std::max(peak, lr);
    if (s > 1) {
      const double jump = std::abs(lr - prev);
      const double max_slope = base / std::min<double>(warmup, total - warmup);
      CHECK(jump <= max_slope + 1e-15);
    }
    prev = lr;
  }
  CHECK(peak == doctest::Approx(base));
}

TEST_CASE("sample_pairs: cross product, empty sides, cap") {
  std::mt19937_64 rng(3);
  const auto full = sample_pairs({0, 1}, {2, 3, 4}, 1000, rng);
  CHECK(full.size() == 6);

  CHECK(sample_pairs({0, 1}, {}, 5, rng).empty());
  CHECK(sample_pairs({}, {1, 2}, 5, rng).empty());

  std::vector<int> negatives(100);
  std::iota(negatives.begin(), negatives.end(), 1);
  const auto capped = sample_pairs({0}, negatives, 10, rng);
  CHECK(capped.size() == 10);
  std::set<int> distinct;
  for (const auto& [p, n] : capped) {
    CHECK(p == 0);
    distinct.insert(n);
  }
  CHECK(distinct.size() == 10);
}

TEST_CASE("sample_pairs: deterministic given the rng state") {
  std::mt19937_64 a(77), b(77);
  std::vector<int> negatives(50);
  std::iota(negatives.begin(), negatives.end(), 3);
  CHECK(sample_pairs({0, 1, 2}, negatives, 7, a) == sample_pairs({0, 1, 2}, negatives, 7, b));
}

namespace {

SynthSpec tiny_spec(std::uint64_t seed) {
  SynthSpec spec;
  spec.vocab_size = 140;
  spec.doc_count = 24;
  spec.min_doc_len = 16;
  spec.max_doc_len = 26;
  spec.seed = seed;
  return spec;
}

TrainConfig tiny_config() {
  TrainConfig cfg;
  cfg.embed_dim = 12;
  cfg.concept_dim = 4;
  cfg.batch_size = 8;
  cfg.epochs = 2;
  cfg.learning_rate = 5e-3;
  cfg.negatives_per_positive = 4;
  cfg.seed = 42;
  return cfg;
}

}  // namespace

TEST_CASE("training is bitwise reproducible for a fixed seed") {
  const auto corpus = synth_corpus(tiny_spec(5));
  auto run = [&] {
    const TrainConfig cfg = tiny_config();
    Vocabulary vocab = build_vocab(corpus, cfg.min_count);
    Model model(cfg.model_dims(vocab.size()), std::move(vocab), cfg.seed);
    Trainer trainer(model, cfg);
    const TrainState state = trainer.train(corpus);
    std::vector<double> flat;
    for (Parameter* p : model.parameters())
      flat.insert(flat.end(), p->value.a.begin(), p->value.a.end());
    return std::pair<std::vector<double>, double>(flat, state.last_epoch.total);
  };
  const auto a = run();
  const auto b = run();
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
}

TEST_CASE("training descends on a small synthetic corpus") {
  const auto corpus = synth_corpus(tiny_spec(6));
  TrainConfig cfg = tiny_config();
  cfg.epochs = 8;
  Vocabulary vocab = build_vocab(corpus, cfg.min_count);
  Model model(cfg.model_dims(vocab.size()), std::move(vocab), cfg.seed);
  Trainer trainer(model, cfg);
  TrainState state;
  state.rng.seed(cfg.seed + 1);
  trainer.train_epoch(corpus, state);
  const double initial = state.last_epoch.total;
  for (int e = 1; e < cfg.epochs; ++e) trainer.train_epoch(corpus, state);
  CHECK(state.last_epoch.total < initial);
  CHECK(state.step == trainer.total_steps(corpus.size()));
}

TEST_CASE("ranking-only ablation leaves chunk and concept parameters frozen") {
  const auto corpus = synth_corpus(tiny_spec(7));
  TrainConfig cfg = tiny_config();
  cfg.epsilon1 = 0.0;
  cfg.epsilon2 = 1.0;
  cfg.epsilon3 = 0.0;
  cfg.weight_decay = 0.0;  // decay would move even zero-gradient parameters
  Vocabulary vocab = build_vocab(corpus, cfg.min_count);
  Model model(cfg.model_dims(vocab.size()), std::move(vocab), cfg.seed);

  std::vector<double> before;
  for (Parameter* p : model.parameters()) {
    if (p->name.rfind("chunk.", 0) == 0 || p->name.rfind("vae.", 0) == 0)
      before.insert(before.end(), p->value.a.begin(), p->value.a.end());
  }
  Trainer trainer(model, cfg);
  trainer.train(corpus);
  std::vector<double> after;
  for (Parameter* p : model.parameters()) {
    if (p->name.rfind("chunk.", 0) == 0 || p->name.rfind("vae.", 0) == 0)
      after.insert(after.end(), p->value.a.begin(), p->value.a.end());
  }
  CHECK(before == after);
}

TEST_CASE("non-finite losses abort with the offending term") {
  const auto corpus = synth_corpus(tiny_spec(8));
  const TrainConfig cfg = tiny_config();
  Vocabulary vocab = build_vocab(corpus, cfg.min_count);
  Model model(cfg.model_dims(vocab.size()), std::move(vocab), cfg.seed);
  for (double& v : model.encoder().embedding.value.a)
    v = std::numeric_limits<double>::infinity();
  Trainer trainer(model, cfg);
  TrainState state;
  state.rng.seed(cfg.seed + 1);
  // ReLU squashes the poisoned candidate path to zero, so the document VAE
  // is the first term to see the non-finite value.
  CHECK_THROWS_WITH_AS(trainer.train_epoch(corpus, state), doctest::Contains("vae_doc"), Error);
}

TEST_CASE("trainer rejects invalid configurations") {
  const auto corpus = synth_corpus(tiny_spec(9));
  TrainConfig cfg = tiny_config();
  cfg.epsilon1 = 0.5;  // sum != 1
  Vocabulary vocab = build_vocab(corpus, 1);
  Model model(cfg.model_dims(vocab.size()), std::move(vocab), cfg.seed);
  CHECK_THROWS_AS(Trainer(model, cfg), ConfigError);
}
