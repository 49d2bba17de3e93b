#pragma once

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "keyrank/corpus.hpp"
#include "keyrank/porter.hpp"

namespace keyrank {

/// Generator for labeled desk-scale corpora: documents of filler tokens with
/// multi-token keyphrases planted at least twice each, near shared topic
/// tokens, plus rare "tail" tokens controlled by noise_rate.
struct SynthSpec {
  int vocab_size = 200;
  int doc_count = 500;
  int min_doc_len = 40;
  int max_doc_len = 70;
  int phrases_per_doc = 3;
  double noise_rate = 0.05;
  std::uint64_t seed = 7;

  void validate() const {
    if (vocab_size < 120) throw ConfigError("synth: vocab_size must be >= 120");
    if (doc_count < 1) throw ConfigError("synth: doc_count must be >= 1");
    if (min_doc_len < 10 || max_doc_len < min_doc_len)
      throw ConfigError("synth: bad document length range");
    if (phrases_per_doc < 1 || phrases_per_doc > 4)
      throw ConfigError("synth: phrases_per_doc must be in 1..4");
    if (noise_rate < 0.0 || noise_rate > 0.5) throw ConfigError("synth: noise_rate must be in [0,0.5]");
  }
};

inline SynthSpec synth_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("synth spec must be a JSON object");
  SynthSpec s;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("vocab_size", s.vocab_size);
  get("doc_count", s.doc_count);
  get("min_doc_len", s.min_doc_len);
  get("max_doc_len", s.max_doc_len);
  get("phrases_per_doc", s.phrases_per_doc);
  get("noise_rate", s.noise_rate);
  get("seed", s.seed);
  return s;
}

inline nlohmann::json to_json(const SynthSpec& s) {
  return nlohmann::json{{"vocab_size", s.vocab_size},       {"doc_count", s.doc_count},
                        {"min_doc_len", s.min_doc_len},     {"max_doc_len", s.max_doc_len},
                        {"phrases_per_doc", s.phrases_per_doc}, {"noise_rate", s.noise_rate},
                        {"seed", s.seed}};
}

inline SynthSpec load_synth_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(cat("cannot open synth spec: ", path));
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(cat("malformed synth spec ", path, ": ", e.what()));
  }
  return synth_spec_from_json(j);
}

namespace synth_detail {

inline std::string make_word(std::mt19937_64& rng) {
  static constexpr char kConsonants[] = "bcdfgklmnprstvz";
  static constexpr char kVowels[] = "aeiou";
  std::uniform_int_distribution<int> syllables(2, 4);
  std::uniform_int_distribution<int> c(0, sizeof(kConsonants) - 2);
  std::uniform_int_distribution<int> v(0, sizeof(kVowels) - 2);
  std::string w;
  const int n = syllables(rng);
  for (int i = 0; i < n; ++i) {
    w.push_back(kConsonants[c(rng)]);
    w.push_back(kVowels[v(rng)]);
  }
  return w;
}

struct Inventory {
  std::vector<std::string> topic_tokens;            // one per topic
  std::vector<std::vector<std::string>> phrases;    // token lists
  std::vector<std::vector<int>> phrases_by_topic;   // indices into phrases
  std::vector<std::string> filler;
  std::vector<std::string> tail;
};

inline Inventory build_inventory(const SynthSpec& spec, std::mt19937_64& rng) {
  const int n_topics = 6;
  const int phrases_per_topic = 4;
  const int n_phrases = n_topics * phrases_per_topic;
  const int n_tail = std::max(20, spec.vocab_size / 5);

  // Unique token strings; keyword stems must also be unique among all stems
  // so that gold matching can only fire on planted spans.
  std::unordered_set<std::string> words;
  std::unordered_set<std::string> stems;
  auto fresh_word = [&](bool unique_stem) {
    while (true) {
      std::string w = make_word(rng);
      if (!words.insert(w).second) continue;
      std::string st = stem(w);
      if (stems.count(st)) {
        if (unique_stem) {
          words.erase(w);
          continue;
        }
      } else {
        stems.insert(st);
      }
      return w;
    }
  };

  Inventory inv;
  std::vector<int> phrase_lens(n_phrases);
  int keyword_budget = 0;
  for (int p = 0; p < n_phrases; ++p) {
    phrase_lens[p] = 2 + (p % 2);  // alternate 2- and 3-token phrases
    keyword_budget += phrase_lens[p];
  }
  const int reserved = n_topics + keyword_budget + n_tail;
  if (spec.vocab_size <= reserved)
    throw ConfigError(cat("synth: vocab_size ", spec.vocab_size, " too small for ", reserved,
                          " reserved tokens"));

  for (int t = 0; t < n_topics; ++t) inv.topic_tokens.push_back(fresh_word(true));
  inv.phrases_by_topic.resize(n_topics);
  for (int p = 0; p < n_phrases; ++p) {
    std::vector<std::string> phrase;
    for (int i = 0; i < phrase_lens[p]; ++i) phrase.push_back(fresh_word(true));
    inv.phrases_by_topic[p % n_topics].push_back(static_cast<int>(inv.phrases.size()));
    inv.phrases.push_back(std::move(phrase));
  }
  for (int i = 0; i < n_tail; ++i) inv.tail.push_back(fresh_word(false));
  const int n_filler = spec.vocab_size - reserved;
  for (int i = 0; i < n_filler; ++i) inv.filler.push_back(fresh_word(false));
  return inv;
}

}  // namespace synth_detail

inline std::vector<LabeledDocument> synth_corpus(const SynthSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  const synth_detail::Inventory inv = synth_detail::build_inventory(spec, rng);

  std::uniform_int_distribution<int> topic_pick(0, static_cast<int>(inv.topic_tokens.size()) - 1);
  std::uniform_int_distribution<int> len_pick(spec.min_doc_len, spec.max_doc_len);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<LabeledDocument> docs;
  docs.reserve(spec.doc_count);
  for (int di = 0; di < spec.doc_count; ++di) {
    const int topic = topic_pick(rng);

    std::vector<int> pool = inv.phrases_by_topic[topic];
    std::vector<int> chosen;
    for (int i = 0; i < spec.phrases_per_doc; ++i) {
      std::uniform_int_distribution<int> pick(0, static_cast<int>(pool.size()) - 1);
      const int at = pick(rng);
      chosen.push_back(pool[at]);
      pool.erase(pool.begin() + at);
    }

    // Base stream: filler with occasional rare tail tokens and a couple of
    // topic-token occurrences.
    const int base_len = len_pick(rng);
    std::vector<std::string> base(base_len);
    std::uniform_int_distribution<int> filler_pick(0, static_cast<int>(inv.filler.size()) - 1);
    std::uniform_int_distribution<int> tail_pick(0, static_cast<int>(inv.tail.size()) - 1);
    for (int i = 0; i < base_len; ++i) {
      base[i] = unit(rng) < spec.noise_rate ? inv.tail[tail_pick(rng)]
                                            : inv.filler[filler_pick(rng)];
    }
    std::uniform_int_distribution<int> pos_pick(0, base_len - 1);
    for (int i = 0; i < 2; ++i) base[pos_pick(rng)] = inv.topic_tokens[topic];

    // Insertions: each phrase 2-3 times, half adjacent to the topic token.
    struct Insert {
      int cut;
      int order;
      std::vector<std::string> tokens;
    };
    std::vector<Insert> inserts;
    std::uniform_int_distribution<int> cut_pick(0, base_len);
    int order = 0;
    for (const int pi : chosen) {
      const int reps = 2 + static_cast<int>(unit(rng) < 0.5);
      for (int r = 0; r < reps; ++r) {
        Insert ins;
        ins.cut = cut_pick(rng);
        ins.order = order++;
        if (unit(rng) < 0.5) ins.tokens.push_back(inv.topic_tokens[topic]);
        ins.tokens.insert(ins.tokens.end(), inv.phrases[pi].begin(), inv.phrases[pi].end());
        if (ins.tokens.front() != inv.topic_tokens[topic] && unit(rng) < 0.5)
          ins.tokens.push_back(inv.topic_tokens[topic]);
        inserts.push_back(std::move(ins));
      }
    }
    std::sort(inserts.begin(), inserts.end(), [](const Insert& a, const Insert& b) {
      if (a.cut != b.cut) return a.cut < b.cut;
      return a.order < b.order;
    });

    LabeledDocument ld;
    ld.doc.id = cat("synth-", std::setw(6), std::setfill('0'), di);
    std::size_t next = 0;
    for (int i = 0; i <= base_len; ++i) {
      while (next < inserts.size() && inserts[next].cut == i) {
        for (const std::string& t : inserts[next].tokens) ld.doc.tokens.push_back(t);
        ++next;
      }
      if (i < base_len) ld.doc.tokens.push_back(base[i]);
    }
    for (const int pi : chosen) ld.gold.push_back(join_tokens(inv.phrases[pi], 0,
                                                              static_cast<int>(inv.phrases[pi].size())));
    std::sort(ld.gold.begin(), ld.gold.end());
    ld.positive_spans = align_labels(ld.doc, ld.gold, 5);
    docs.push_back(std::move(ld));
  }
  return docs;
}

/// Writes the generated corpus as dataset JSONL (text form); byte-identical
/// for identical specs.
inline void write_synth_corpus(const SynthSpec& spec, const std::string& path) {
  const auto docs = synth_corpus(spec);
  std::ofstream out(path);
  if (!out) throw IoError(cat("cannot write synth corpus: ", path));
  for (const LabeledDocument& d : docs) {
    nlohmann::json j{{"id", d.doc.id},
                     {"text", join_tokens(d.doc.tokens, 0, static_cast<int>(d.doc.tokens.size()))},
                     {"keyphrases", d.gold}};
    out << j.dump() << '\n';
  }
}

}  // namespace keyrank
