#pragma once

#include <algorithm>
#include <cctype>
#include <compare>
#include <fstream>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "keyrank/common.hpp"
#include "keyrank/porter.hpp"
#include "keyrank/tokenizer.hpp"

namespace keyrank {

/// Half-open token span: tokens [start, start + length).
struct Span {
  int start = 0;
  int length = 0;
  auto operator<=>(const Span&) const = default;
};

struct Document {
  std::string id;
  std::vector<std::string> tokens;
  std::string raw_text;  // empty when the input was pre-tokenized
};

struct LabeledDocument {
  Document doc;
  std::vector<std::string> gold;
  std::vector<Span> positive_spans;  // sorted, unique
};

inline std::string join_tokens(const std::vector<std::string>& tokens, int start, int length) {
  std::string s;
  for (int i = start; i < start + length; ++i) {
    if (i > start) s += ' ';
    s += tokens[i];
  }
  return s;
}

inline std::string span_surface(const Document& doc, Span s) {
  return join_tokens(doc.tokens, s.start, s.length);
}

/// Space-joined Porter stems of a token sequence.
inline std::string stemmed_phrase(const std::vector<std::string>& tokens) {
  std::string s;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) s += ' ';
    s += stem(tokens[i]);
  }
  return s;
}

inline std::string stemmed_phrase(const std::string& phrase) {
  return stemmed_phrase(tokenize(phrase));
}

inline std::string span_stemmed(const Document& doc, Span s) {
  std::string out;
  for (int i = s.start; i < s.start + s.length; ++i) {
    if (i > s.start) out += ' ';
    out += stem(doc.tokens[i]);
  }
  return out;
}

/// All spans (i, n) with n <= max_len whose stemmed surface equals the
/// stemmed form of some gold phrase. Result sorted by (start, length).
inline std::vector<Span> align_labels(const Document& doc, const std::vector<std::string>& gold,
                                      int max_len) {
  if (max_len < 1) throw ConfigError("align_labels: max_len must be >= 1");
  std::set<std::string> gold_stems;
  for (const std::string& g : gold) {
    const std::string s = stemmed_phrase(g);
    if (!s.empty()) gold_stems.insert(s);
  }
  std::vector<Span> out;
  const int m = static_cast<int>(doc.tokens.size());
  if (gold_stems.empty() || m == 0) return out;
  std::vector<std::string> stems(doc.tokens.size());
  for (std::size_t i = 0; i < doc.tokens.size(); ++i) stems[i] = stem(doc.tokens[i]);
  for (int i = 0; i < m; ++i) {
    std::string joined;
    for (int n = 1; n <= std::min(max_len, m - i); ++n) {
      if (n > 1) joined += ' ';
      joined += stems[i + n - 1];
      if (gold_stems.count(joined)) out.push_back(Span{i, n});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct CorpusOptions {
  int max_seq_len = 512;
  int max_phrase_len = 5;
  bool require_gold = true;  // extraction inputs may omit the keyphrases field
};

inline std::string lowercase_ascii(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

/// Parses one dataset line. Fields: id (string), text (string) or tokens
/// (array of strings), keyphrases (array of strings). Unknown fields ignored.
inline LabeledDocument parse_dataset_line(const std::string& line, long line_no,
                                          const CorpusOptions& opts) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(cat("line ", line_no, ": malformed JSON: ", e.what()));
  }
  if (!j.is_object()) throw SchemaError(cat("line ", line_no, ": expected a JSON object"));
  if (!j.contains("id") || !j["id"].is_string())
    throw SchemaError(cat("line ", line_no, ": missing string field 'id'"));

  LabeledDocument d;
  d.doc.id = j["id"].get<std::string>();
  if (j.contains("tokens")) {
    if (!j["tokens"].is_array())
      throw SchemaError(cat("line ", line_no, ": field 'tokens' must be an array of strings"));
    for (const auto& t : j["tokens"]) {
      if (!t.is_string())
        throw SchemaError(cat("line ", line_no, ": field 'tokens' must be an array of strings"));
      d.doc.tokens.push_back(lowercase_ascii(t.get<std::string>()));
    }
  } else if (j.contains("text")) {
    if (!j["text"].is_string())
      throw SchemaError(cat("line ", line_no, ": field 'text' must be a string"));
    d.doc.raw_text = j["text"].get<std::string>();
    d.doc.tokens = tokenize(d.doc.raw_text);
  } else {
    throw SchemaError(cat("line ", line_no, ": missing field 'text' or 'tokens'"));
  }
  if (j.contains("keyphrases")) {
    if (!j["keyphrases"].is_array())
      throw SchemaError(cat("line ", line_no, ": field 'keyphrases' must be an array"));
    for (const auto& g : j["keyphrases"]) {
      if (!g.is_string())
        throw SchemaError(cat("line ", line_no, ": keyphrases entries must be strings"));
      d.gold.push_back(g.get<std::string>());
    }
  } else if (opts.require_gold) {
    throw SchemaError(cat("line ", line_no, ": missing field 'keyphrases'"));
  }

  if (static_cast<int>(d.doc.tokens.size()) > opts.max_seq_len)
    d.doc.tokens.resize(opts.max_seq_len);
  if (d.doc.tokens.empty())
    throw SchemaError(cat("line ", line_no, ": document '", d.doc.id, "' has no tokens"));
  d.positive_spans = align_labels(d.doc, d.gold, opts.max_phrase_len);
  return d;
}

/// Streams LabeledDocuments out of a JSONL file; single consumer.
inline void for_each_document(const std::string& path, const CorpusOptions& opts,
                              const std::function<void(LabeledDocument&&)>& fn) {
  std::ifstream in(path);
  if (!in) throw IoError(cat("cannot open dataset file: ", path));
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    fn(parse_dataset_line(line, line_no, opts));
  }
}

inline std::vector<LabeledDocument> load_corpus(const std::string& path,
                                                const CorpusOptions& opts = {}) {
  std::vector<LabeledDocument> docs;
  for_each_document(path, opts, [&](LabeledDocument&& d) { docs.push_back(std::move(d)); });
  return docs;
}

inline nlohmann::json document_to_json(const LabeledDocument& d) {
  nlohmann::json j;
  j["id"] = d.doc.id;
  j["tokens"] = d.doc.tokens;
  j["keyphrases"] = d.gold;
  return j;
}

inline void save_corpus(const std::vector<LabeledDocument>& docs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError(cat("cannot write dataset file: ", path));
  for (const LabeledDocument& d : docs) out << document_to_json(d).dump() << '\n';
}

}  // namespace keyrank
