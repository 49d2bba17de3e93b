#pragma once

#include <algorithm>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "keyrank/model.hpp"

namespace keyrank {

struct ScoredPhrase {
  std::string surface;
  std::string stemmed;
  double score = 0.0;
  Span best_span;
};

namespace extract_detail {

inline bool scored_before(const ScoredPhrase& a, const ScoredPhrase& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.best_span.start != b.best_span.start) return a.best_span.start < b.best_span.start;
  return a.best_span.length < b.best_span.length;
}

}  // namespace extract_detail

/// Deduplicates spans by exact lowercase surface (max score kept, earlier
/// then shorter span wins ties) and sorts descending by score.
inline std::vector<ScoredPhrase> dedup_and_sort(const Document& doc,
                                                const std::vector<Span>& spans,
                                                const Vec& scores) {
  std::unordered_map<std::string, std::size_t> by_surface;
  std::vector<ScoredPhrase> out;
  for (std::size_t k = 0; k < spans.size(); ++k) {
    std::string surface = span_surface(doc, spans[k]);
    auto [it, inserted] = by_surface.try_emplace(surface, out.size());
    if (inserted) {
      out.push_back(ScoredPhrase{std::move(surface), span_stemmed(doc, spans[k]), scores[k],
                                 spans[k]});
      continue;
    }
    ScoredPhrase& best = out[it->second];
    const ScoredPhrase challenger{std::string(), std::string(), scores[k], spans[k]};
    if (scores[k] > best.score ||
        (scores[k] == best.score && extract_detail::scored_before(challenger, best))) {
      best.score = scores[k];
      best.best_span = spans[k];
    }
  }
  std::sort(out.begin(), out.end(), extract_detail::scored_before);
  return out;
}

/// Ranking-only inference: every candidate scored by the saliency head alone.
inline std::vector<ScoredPhrase> score_document(const Model& model, const Document& doc,
                                                const PrecomputedEmbeddings* pre = nullptr) {
  const Model::SpanScores ss = model.rank_spans(doc, pre);
  if (ss.spans.empty()) return {};
  return dedup_and_sort(doc, ss.spans, ss.scores);
}

inline std::vector<std::string> extract_topk(const std::vector<ScoredPhrase>& scored, int k) {
  if (k < 1) throw ConfigError("extract_topk: k must be >= 1");
  std::vector<std::string> out;
  const std::size_t take = std::min<std::size_t>(k, scored.size());
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(scored[i].surface);
  return out;
}

struct DocExtraction {
  std::string id;
  std::vector<std::string> phrases;
  std::vector<double> scores;
};

inline void write_extractions(const std::vector<DocExtraction>& docs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError(cat("cannot write extraction file: ", path));
  for (const DocExtraction& d : docs) {
    nlohmann::json j{{"id", d.id}, {"keyphrases", d.phrases}, {"scores", d.scores}};
    out << j.dump() << '\n';
  }
}

inline std::vector<DocExtraction> read_extractions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(cat("cannot open extraction file: ", path));
  std::vector<DocExtraction> docs;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(cat("prediction line ", line_no, ": malformed JSON: ", e.what()));
    }
    if (!j.contains("id") || !j.contains("keyphrases"))
      throw SchemaError(cat("prediction line ", line_no, ": need fields id, keyphrases"));
    DocExtraction d;
    d.id = j.at("id").get<std::string>();
    d.phrases = j.at("keyphrases").get<std::vector<std::string>>();
    if (j.contains("scores")) d.scores = j.at("scores").get<std::vector<double>>();
    docs.push_back(std::move(d));
  }
  return docs;
}

/// Scores, deduplicates and truncates every document of a corpus.
inline std::vector<DocExtraction> extract_corpus(const Model& model,
                                                 const std::vector<LabeledDocument>& docs, int k,
                                                 const PrecomputedEmbeddings* pre = nullptr) {
  std::vector<DocExtraction> out;
  out.reserve(docs.size());
  for (const LabeledDocument& ld : docs) {
    const auto scored = score_document(model, ld.doc, pre);
    DocExtraction d;
    d.id = ld.doc.id;
    const std::size_t take = std::min<std::size_t>(k, scored.size());
    for (std::size_t i = 0; i < take; ++i) {
      d.phrases.push_back(scored[i].surface);
      d.scores.push_back(scored[i].score);
    }
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace keyrank
