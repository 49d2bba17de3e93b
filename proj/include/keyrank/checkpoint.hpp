#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "keyrank/model.hpp"

namespace keyrank {

inline constexpr int kCheckpointVersion = 1;

/// Checkpoint JSON: version tag, model dims, vocabulary in id order, and one
/// entry per parameter mapping name -> shape -> row-major values.
inline nlohmann::json checkpoint_to_json(Model& model) {
  nlohmann::json j;
  j["format_version"] = kCheckpointVersion;
  j["model"] = {{"embed_dim", model.dims().embed_dim},
                {"concept_dim", model.dims().concept_dim},
                {"max_phrase_len", model.dims().max_phrase_len},
                {"vocab_size", model.dims().vocab_size}};
  j["vocab"] = model.vocab().tokens();
  nlohmann::json params = nlohmann::json::object();
  for (Parameter* p : model.parameters()) {
    params[p->name] = {{"shape", {p->rows(), p->cols()}}, {"values", p->value.a}};
  }
  j["params"] = std::move(params);
  return j;
}

inline void save_checkpoint(Model& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError(cat("cannot write checkpoint: ", path));
  out << checkpoint_to_json(model).dump() << '\n';
}

inline Model checkpoint_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("format_version"))
    throw SchemaError("checkpoint: missing format_version tag");
  const int version = j.at("format_version").get<int>();
  if (version != kCheckpointVersion)
    throw SchemaError(cat("checkpoint: unsupported format_version ", version));
  for (const char* key : {"model", "vocab", "params"}) {
    if (!j.contains(key)) throw SchemaError(cat("checkpoint: missing field '", key, "'"));
  }
  const auto& m = j.at("model");
  ModelDims dims;
  dims.embed_dim = m.at("embed_dim").get<int>();
  dims.concept_dim = m.at("concept_dim").get<int>();
  dims.max_phrase_len = m.at("max_phrase_len").get<int>();
  dims.vocab_size = m.at("vocab_size").get<int>();
  Vocabulary vocab(j.at("vocab").get<std::vector<std::string>>());
  if (vocab.size() != dims.vocab_size)
    throw SchemaError(cat("checkpoint: vocab has ", vocab.size(), " entries, expected ",
                          dims.vocab_size));

  Model model(dims, std::move(vocab), /*seed=*/0);
  const auto& params = j.at("params");
  for (Parameter* p : model.parameters()) {
    if (!params.contains(p->name))
      throw SchemaError(cat("checkpoint: missing parameter '", p->name, "'"));
    const auto& entry = params.at(p->name);
    const auto shape = entry.at("shape").get<std::vector<int>>();
    if (shape.size() != 2 || shape[0] != p->rows() || shape[1] != p->cols())
      throw SchemaError(cat("checkpoint: parameter '", p->name, "' has wrong shape"));
    const auto values = entry.at("values").get<std::vector<double>>();
    if (values.size() != p->size())
      throw SchemaError(cat("checkpoint: parameter '", p->name, "' has ", values.size(),
                            " values, expected ", p->size()));
    p->value.a = values;
    require_finite(p->value, cat("checkpoint parameter '", p->name, "'"));
  }
  return model;
}

inline Model load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(cat("cannot open checkpoint: ", path));
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(cat("malformed checkpoint ", path, ": ", e.what()));
  }
  return checkpoint_from_json(j);
}

}  // namespace keyrank
