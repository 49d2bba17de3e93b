#pragma once

#include <algorithm>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "keyrank/common.hpp"
#include "keyrank/corpus.hpp"

namespace keyrank {

class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  Vocabulary() : id_to_token_{"<pad>", "<unk>"} { rebuild_index(); }

  /// From a token list in id order (checkpoint load); specials must lead.
  explicit Vocabulary(std::vector<std::string> id_to_token) : id_to_token_(std::move(id_to_token)) {
    if (id_to_token_.size() < 2 || id_to_token_[kPad] != "<pad>" || id_to_token_[kUnk] != "<unk>")
      throw SchemaError("vocabulary must start with <pad>, <unk>");
    rebuild_index();
  }

  int id_of(const std::string& token) const {
    auto it = token_to_id_.find(token);
    return it == token_to_id_.end() ? kUnk : it->second;
  }

  bool contains(const std::string& token) const { return token_to_id_.count(token) > 0; }

  const std::string& token_of(int id) const {
    if (id < 0 || id >= size()) throw NotFoundError(cat("vocabulary id out of range: ", id));
    return id_to_token_[id];
  }

  int size() const { return static_cast<int>(id_to_token_.size()); }
  const std::vector<std::string>& tokens() const { return id_to_token_; }

 private:
  void rebuild_index() {
    token_to_id_.clear();
    for (int i = 0; i < size(); ++i) {
      if (!token_to_id_.emplace(id_to_token_[i], i).second)
        throw SchemaError(cat("duplicate vocabulary token: ", id_to_token_[i]));
    }
  }

  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, int> token_to_id_;
};

/// Corpus-wide frequency threshold; ids assigned by (count desc, token asc)
/// so construction is deterministic.
inline Vocabulary build_vocab(const std::vector<LabeledDocument>& corpus, int min_count) {
  if (min_count < 1) throw ConfigError("build_vocab: min_count must be >= 1");
  if (corpus.empty()) throw ConfigError("build_vocab: empty corpus");
  std::unordered_map<std::string, long> counts;
  for (const LabeledDocument& d : corpus) {
    for (const std::string& t : d.doc.tokens) ++counts[t];
  }
  std::vector<std::pair<std::string, long>> kept;
  kept.reserve(counts.size());
  for (const auto& [tok, n] : counts) {
    if (n >= min_count) kept.emplace_back(tok, n);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> id_to_token{"<pad>", "<unk>"};
  id_to_token.reserve(kept.size() + 2);
  for (const auto& [tok, n] : kept) id_to_token.push_back(tok);
  return Vocabulary(std::move(id_to_token));
}

}  // namespace keyrank
