#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>

#include <json.hpp>

#include "keyrank/common.hpp"
#include "keyrank/model.hpp"

namespace keyrank {

/// Training configuration. JSON config files use exactly these field names;
/// unspecified fields keep their defaults.
struct TrainConfig {
  double learning_rate = 1e-5;
  int batch_size = 32;
  double warmup_proportion = 0.10;
  int epochs = 20;
  double lambda = 0.5;
  double epsilon1 = 1.0 / 3.0;
  double epsilon2 = 1.0 / 3.0;
  double epsilon3 = 1.0 / 3.0;
  double delta1 = 1.0;
  double delta2 = 1.0;
  int max_phrase_len = 5;
  int embed_dim = 64;
  int concept_dim = 16;
  int max_seq_len = 512;
  int negatives_per_positive = 10;
  std::uint64_t seed = 13;
  int min_count = 1;
  double weight_decay = 0.01;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::string train_data;               // JSONL dataset path
  std::string precomputed_embeddings;   // optional embedding JSONL path

  void validate() const {
    if (learning_rate <= 0.0) throw ConfigError("learning_rate must be > 0");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (warmup_proportion < 0.0 || warmup_proportion > 1.0)
      throw ConfigError("warmup_proportion must be in [0,1]");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (!(lambda > 0.0 && lambda < 1.0)) throw ConfigError("lambda must be in (0,1)");
    if (epsilon1 < 0.0 || epsilon2 < 0.0 || epsilon3 < 0.0)
      throw ConfigError("epsilon weights must be non-negative");
    if (std::abs(epsilon1 + epsilon2 + epsilon3 - 1.0) > 1e-9)
      throw ConfigError(cat("epsilon weights must sum to 1, got ",
                            epsilon1 + epsilon2 + epsilon3));
    if (delta1 < 0.0 || delta2 < 0.0) throw ConfigError("margins must be >= 0");
    if (max_phrase_len < 1 || embed_dim < 1 || concept_dim < 1 || max_seq_len < 1)
      throw ConfigError("dimensions must be >= 1");
    if (negatives_per_positive < 1) throw ConfigError("negatives_per_positive must be >= 1");
    if (min_count < 1) throw ConfigError("min_count must be >= 1");
  }

  LossParams loss_params() const {
    return LossParams{delta1, delta2, lambda, epsilon1, epsilon2, epsilon3};
  }

  ModelDims model_dims(int vocab_size) const {
    return ModelDims{vocab_size, embed_dim, concept_dim, max_phrase_len};
  }

  CorpusOptions corpus_options() const {
    CorpusOptions o;
    o.max_seq_len = max_seq_len;
    o.max_phrase_len = max_phrase_len;
    return o;
  }
};

inline nlohmann::json to_json(const TrainConfig& c) {
  return nlohmann::json{{"learning_rate", c.learning_rate},
                        {"batch_size", c.batch_size},
                        {"warmup_proportion", c.warmup_proportion},
                        {"epochs", c.epochs},
                        {"lambda", c.lambda},
                        {"epsilon1", c.epsilon1},
                        {"epsilon2", c.epsilon2},
                        {"epsilon3", c.epsilon3},
                        {"delta1", c.delta1},
                        {"delta2", c.delta2},
                        {"max_phrase_len", c.max_phrase_len},
                        {"embed_dim", c.embed_dim},
                        {"concept_dim", c.concept_dim},
                        {"max_seq_len", c.max_seq_len},
                        {"negatives_per_positive", c.negatives_per_positive},
                        {"seed", c.seed},
                        {"min_count", c.min_count},
                        {"weight_decay", c.weight_decay},
                        {"adam_beta1", c.adam_beta1},
                        {"adam_beta2", c.adam_beta2},
                        {"adam_epsilon", c.adam_epsilon},
                        {"train_data", c.train_data},
                        {"precomputed_embeddings", c.precomputed_embeddings}};
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  TrainConfig c;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("learning_rate", c.learning_rate);
  get("batch_size", c.batch_size);
  get("warmup_proportion", c.warmup_proportion);
  get("epochs", c.epochs);
  get("lambda", c.lambda);
  get("epsilon1", c.epsilon1);
  get("epsilon2", c.epsilon2);
  get("epsilon3", c.epsilon3);
  get("delta1", c.delta1);
  get("delta2", c.delta2);
  get("max_phrase_len", c.max_phrase_len);
  get("embed_dim", c.embed_dim);
  get("concept_dim", c.concept_dim);
  get("max_seq_len", c.max_seq_len);
  get("negatives_per_positive", c.negatives_per_positive);
  get("seed", c.seed);
  get("min_count", c.min_count);
  get("weight_decay", c.weight_decay);
  get("adam_beta1", c.adam_beta1);
  get("adam_beta2", c.adam_beta2);
  get("adam_epsilon", c.adam_epsilon);
  get("train_data", c.train_data);
  get("precomputed_embeddings", c.precomputed_embeddings);
  return c;
}

inline TrainConfig load_train_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(cat("cannot open config file: ", path));
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(cat("malformed config file ", path, ": ", e.what()));
  }
  return train_config_from_json(j);
}

inline void save_train_config(const TrainConfig& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError(cat("cannot write config file: ", path));
  out << to_json(c).dump(2) << '\n';
}

}  // namespace keyrank
