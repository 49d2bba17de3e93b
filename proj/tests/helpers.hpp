#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "keyrank/corpus.hpp"
#include "keyrank/model.hpp"
#include "keyrank/vocab.hpp"

namespace testing {

/// Temp file that deletes itself; content written on construction.
class TempFile {
 public:
  explicit TempFile(const std::string& content, const std::string& suffix = ".jsonl") {
    static int counter = 0;
    path_ = (std::filesystem::temp_directory_path() /
             ("keyrank_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) +
              suffix))
                .string();
    std::ofstream out(path_);
    out << content;
  }
  ~TempFile() { std::error_code ec; std::filesystem::remove(path_, ec); }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

inline std::string temp_path(const std::string& suffix) {
  static int counter = 0;
  return (std::filesystem::temp_directory_path() /
          ("keyrank_out_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) + suffix))
      .string();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline keyrank::Document make_doc(const std::string& id, std::vector<std::string> tokens) {
  keyrank::Document d;
  d.id = id;
  d.tokens = std::move(tokens);
  return d;
}

inline keyrank::LabeledDocument make_labeled(const std::string& id,
                                             std::vector<std::string> tokens,
                                             std::vector<std::string> gold, int max_n = 5) {
  keyrank::LabeledDocument ld;
  ld.doc = make_doc(id, std::move(tokens));
  ld.gold = std::move(gold);
  ld.positive_spans = keyrank::align_labels(ld.doc, ld.gold, max_n);
  return ld;
}

/// Tiny model over an ad-hoc vocabulary for pipeline tests.
struct ToyPipeline {
  std::vector<keyrank::LabeledDocument> docs;
  keyrank::Model model;

  static ToyPipeline make(std::uint64_t seed, int d = 8, int c = 4, int n = 3) {
    std::mt19937_64 rng(seed);
    std::vector<std::string> toks;
    for (int i = 0; i < 14; ++i) toks.push_back("tok" + std::to_string(i));
    std::vector<keyrank::LabeledDocument> docs;
    std::uniform_int_distribution<int> pick(0, static_cast<int>(toks.size()) - 1);
    const int lens[2] = {7, 10};
    for (int di = 0; di < 2; ++di) {
      std::vector<std::string> tokens;
      for (int i = 0; i < lens[di]; ++i) tokens.push_back(toks[pick(rng)]);
      std::vector<std::string> gold{tokens[1] + " " + tokens[2]};
      docs.push_back(make_labeled("toy" + std::to_string(di), tokens, gold, n));
    }
    keyrank::Vocabulary vocab = keyrank::build_vocab(docs, 1);
    keyrank::ModelDims dims{vocab.size(), d, c, n};
    return ToyPipeline{docs, keyrank::Model(dims, std::move(vocab), seed)};
  }
};

}  // namespace testing
