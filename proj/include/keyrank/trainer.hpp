#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "keyrank/adamw.hpp"
#include "keyrank/checkpoint.hpp"
#include "keyrank/config.hpp"
#include "keyrank/model.hpp"

namespace keyrank {

/// Linear warmup to base_lr over ceil(warmup * total) steps, then linear
/// decay to 0 at total_steps. Steps are 1-based.
inline double lr_at(long step, long total_steps, double base_lr, double warmup_proportion) {
  if (step < 1 || step > total_steps)
    throw ConfigError(cat("lr_at: step ", step, " outside [1, ", total_steps, "]"));
  const long warmup_steps =
      static_cast<long>(std::ceil(warmup_proportion * static_cast<double>(total_steps)));
  if (step <= warmup_steps)
    return base_lr * static_cast<double>(step) / static_cast<double>(warmup_steps);
  if (total_steps == warmup_steps) return base_lr;
  return base_lr * static_cast<double>(total_steps - step) /
         static_cast<double>(total_steps - warmup_steps);
}

/// For each positive, min(cap, |negatives|) distinct negatives sampled
/// without replacement. Deterministic given the rng state.
inline std::vector<std::pair<int, int>> sample_pairs(const std::vector<int>& positives,
                                                     const std::vector<int>& negatives,
                                                     int cap_per_positive, std::mt19937_64& rng) {
  std::vector<std::pair<int, int>> pairs;
  if (positives.empty() || negatives.empty()) return pairs;
  const int take = std::min<int>(cap_per_positive, static_cast<int>(negatives.size()));
  pairs.reserve(positives.size() * static_cast<std::size_t>(take));
  std::vector<int> pool(negatives);
  for (const int p : positives) {
    // Partial Fisher-Yates: the first `take` entries become the sample.
    for (int i = 0; i < take; ++i) {
      std::uniform_int_distribution<int> pick(i, static_cast<int>(pool.size()) - 1);
      std::swap(pool[i], pool[pick(rng)]);
      pairs.emplace_back(p, pool[i]);
    }
  }
  return pairs;
}

/// Builds the per-document sampling plan: positive/negative candidate split,
/// hinge/triplet pairs, phrase set for the VAE, and Gaussian noise draws.
inline TrainPlan make_plan(const std::vector<Span>& spans,
                           const std::vector<Span>& positive_spans, int negatives_per_positive,
                           int concept_dim, std::mt19937_64& rng) {
  TrainPlan plan;
  for (std::size_t k = 0; k < spans.size(); ++k) {
    if (std::binary_search(positive_spans.begin(), positive_spans.end(), spans[k]))
      plan.pairs.positives.push_back(static_cast<int>(k));
    else
      plan.pairs.negatives.push_back(static_cast<int>(k));
  }
  plan.pairs.pairs =
      sample_pairs(plan.pairs.positives, plan.pairs.negatives, negatives_per_positive, rng);

  plan.vae_candidates.reserve(plan.pairs.pairs.size() * 2);
  for (const auto& [p, n] : plan.pairs.pairs) {
    plan.vae_candidates.push_back(p);
    plan.vae_candidates.push_back(n);
  }
  std::sort(plan.vae_candidates.begin(), plan.vae_candidates.end());
  plan.vae_candidates.erase(std::unique(plan.vae_candidates.begin(), plan.vae_candidates.end()),
                            plan.vae_candidates.end());

  std::normal_distribution<double> normal(0.0, 1.0);
  plan.eps_doc.resize(concept_dim);
  for (double& v : plan.eps_doc) v = normal(rng);
  plan.eps_phrase.resize(plan.vae_candidates.size());
  for (Vec& e : plan.eps_phrase) {
    e.resize(concept_dim);
    for (double& v : e) v = normal(rng);
  }
  return plan;
}

struct TrainState {
  long step = 0;
  int epoch = 0;
  LossBreakdown last_epoch;  // per-document means over the epoch
  long rank_skips = 0;       // documents with no usable pairs
  std::mt19937_64 rng;
};

class Trainer {
 public:
  Trainer(Model& model, TrainConfig cfg, const PrecomputedEmbeddings* pre = nullptr)
      : model_(model), cfg_(std::move(cfg)), pre_(pre),
        opt_(model.parameters(),
             AdamWConfig{cfg_.adam_beta1, cfg_.adam_beta2, cfg_.adam_epsilon, cfg_.weight_decay}) {
    cfg_.validate();
  }

  long total_steps(std::size_t corpus_size) const {
    const long batches = static_cast<long>((corpus_size + cfg_.batch_size - 1) / cfg_.batch_size);
    return batches * cfg_.epochs;
  }

  /// One pass over the corpus: shuffle, batch, forward/backward, AdamW step
  /// with the warmup/decay schedule.
  void train_epoch(const std::vector<LabeledDocument>& corpus, TrainState& state) {
    if (corpus.empty()) throw ConfigError("train_epoch: empty corpus");
    const long total = total_steps(corpus.size());
    std::vector<int> order(corpus.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), state.rng);

    const LossParams lp = cfg_.loss_params();
    LossBreakdown epoch_mean;
    long docs_seen = 0;

    for (std::size_t begin = 0; begin < order.size(); begin += cfg_.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg_.batch_size);
      const int batch_docs = static_cast<int>(end - begin);
      const LossWeights weights = LossWeights::from(lp, batch_docs);
      zero_grads(model_.parameters());

      for (std::size_t i = begin; i < end; ++i) {
        const LabeledDocument& ld = corpus[order[i]];
        const auto spans = enumerate_spans(static_cast<int>(ld.doc.tokens.size()),
                                           cfg_.max_phrase_len);
        TrainPlan plan = make_plan(spans, ld.positive_spans, cfg_.negatives_per_positive,
                                   cfg_.concept_dim, state.rng);
        ForwardCache fc = model_.forward_train(ld, std::move(plan), lp, pre_);
        check_finite(fc.losses, state.step + 1, ld.doc.id);
        if (fc.losses.pair_skip) ++state.rank_skips;
        model_.backward(fc, weights);

        epoch_mean.chunk += fc.losses.chunk;
        epoch_mean.rank += fc.losses.rank;
        epoch_mean.match += fc.losses.match;
        epoch_mean.vae_doc += fc.losses.vae_doc;
        epoch_mean.vae_phrase += fc.losses.vae_phrase;
        epoch_mean.matching += fc.losses.matching;
        epoch_mean.total += fc.losses.total;
        ++docs_seen;
      }

      ++state.step;
      opt_.step(lr_at(state.step, total, cfg_.learning_rate, cfg_.warmup_proportion));
    }

    const double inv = 1.0 / static_cast<double>(docs_seen);
    epoch_mean.chunk *= inv;
    epoch_mean.rank *= inv;
    epoch_mean.match *= inv;
    epoch_mean.vae_doc *= inv;
    epoch_mean.vae_phrase *= inv;
    epoch_mean.matching *= inv;
    epoch_mean.total *= inv;
    state.last_epoch = epoch_mean;
    ++state.epoch;
  }

  /// Full run. When out_dir is non-empty, writes the effective config, one
  /// checkpoint per epoch, and the final model there.
  TrainState train(const std::vector<LabeledDocument>& corpus, const std::string& out_dir = "",
                   bool verbose = false) {
    TrainState state;
    state.rng.seed(cfg_.seed + 1);
    if (!out_dir.empty()) {
      std::filesystem::create_directories(out_dir);
      save_train_config(cfg_, out_dir + "/config.json");
    }
    for (int e = 0; e < cfg_.epochs; ++e) {
      train_epoch(corpus, state);
      if (verbose) {
        std::fprintf(stderr,
                     "epoch %3d  loss %.6f  chunk %.6f  rank %.6f  matching %.6f  skips %ld\n",
                     state.epoch, state.last_epoch.total, state.last_epoch.chunk,
                     state.last_epoch.rank, state.last_epoch.matching, state.rank_skips);
      }
      if (!out_dir.empty())
        save_checkpoint(model_, cat(out_dir, "/epoch-", std::to_string(state.epoch), ".ckpt.json"));
    }
    if (!out_dir.empty()) save_checkpoint(model_, out_dir + "/model.ckpt.json");
    return state;
  }

  const TrainConfig& config() const { return cfg_; }

 private:
  static void check_finite(const LossBreakdown& l, long step, const std::string& doc_id) {
    struct Term {
      const char* name;
      double value;
    };
    for (const Term t : {Term{"chunk", l.chunk}, Term{"rank", l.rank}, Term{"match", l.match},
                         Term{"vae_doc", l.vae_doc}, Term{"vae_phrase", l.vae_phrase},
                         Term{"total", l.total}}) {
      if (!std::isfinite(t.value))
        throw Error(cat("non-finite ", t.name, " loss at step ", step, " (document '", doc_id,
                        "')"));
    }
  }

  Model& model_;
  TrainConfig cfg_;
  const PrecomputedEmbeddings* pre_;
  AdamW opt_;
};

}  // namespace keyrank
