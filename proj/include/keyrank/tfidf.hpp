#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "keyrank/candidates.hpp"
#include "keyrank/corpus.hpp"
#include "keyrank/extract.hpp"

namespace keyrank {

/// Unsupervised baseline: each candidate span scores
/// tf(stemmed span in doc) * ln((1 + |corpus|) / (1 + df(stemmed span))),
/// with document frequencies taken over the given corpus itself.
inline std::vector<std::vector<ScoredPhrase>> tfidf_baseline(
    const std::vector<LabeledDocument>& corpus, int max_phrase_len) {
  if (max_phrase_len < 1) throw ConfigError("tfidf_baseline: max_phrase_len must be >= 1");

  std::unordered_map<std::string, int> df;
  std::vector<std::vector<Span>> all_spans(corpus.size());
  std::vector<std::vector<std::string>> all_stems(corpus.size());

  for (std::size_t di = 0; di < corpus.size(); ++di) {
    const Document& doc = corpus[di].doc;
    if (doc.tokens.empty()) continue;
    all_spans[di] = enumerate_spans(static_cast<int>(doc.tokens.size()), max_phrase_len);
    all_stems[di].reserve(all_spans[di].size());
    std::unordered_set<std::string> seen;
    for (const Span s : all_spans[di]) {
      std::string st = span_stemmed(doc, s);
      if (seen.insert(st).second) ++df[st];
      all_stems[di].push_back(std::move(st));
    }
  }

  const double corpus_size = static_cast<double>(corpus.size());
  std::vector<std::vector<ScoredPhrase>> out(corpus.size());
  for (std::size_t di = 0; di < corpus.size(); ++di) {
    const Document& doc = corpus[di].doc;
    if (doc.tokens.empty()) continue;
    std::unordered_map<std::string, int> tf;
    for (const std::string& st : all_stems[di]) ++tf[st];
    Vec scores(all_spans[di].size(), 0.0);
    for (std::size_t k = 0; k < all_spans[di].size(); ++k) {
      const std::string& st = all_stems[di][k];
      const double idf = std::log((1.0 + corpus_size) / (1.0 + df.at(st)));
      scores[k] = tf.at(st) * idf;
    }
    out[di] = dedup_and_sort(doc, all_spans[di], scores);
  }
  return out;
}

inline std::vector<DocExtraction> tfidf_extract(const std::vector<LabeledDocument>& corpus,
                                                int max_phrase_len, int k) {
  const auto ranked = tfidf_baseline(corpus, max_phrase_len);
  std::vector<DocExtraction> out;
  out.reserve(corpus.size());
  for (std::size_t di = 0; di < corpus.size(); ++di) {
    DocExtraction d;
    d.id = corpus[di].doc.id;
    const std::size_t take = std::min<std::size_t>(k, ranked[di].size());
    for (std::size_t i = 0; i < take; ++i) {
      d.phrases.push_back(ranked[di][i].surface);
      d.scores.push_back(ranked[di][i].score);
    }
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace keyrank
