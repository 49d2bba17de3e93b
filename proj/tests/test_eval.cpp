#include <doctest.h>

#include <algorithm>
#include <random>

#include "helpers.hpp"
#include "keyrank/extract.hpp"
#include "keyrank/metrics.hpp"
#include "keyrank/synth.hpp"
#include "keyrank/tfidf.hpp"

using namespace keyrank;

TEST_CASE("evaluate: full recall when all gold phrases are found") {
  std::map<std::string, std::vector<std::string>> gold{
      {"d1", {"error bound", "grobner base"}}};
  std::vector<DocExtraction> preds{
      {"d1", {"noise", "error bounds", "more noise", "grobner bases", "filler"}, {}}};
  const auto report = evaluate(preds, gold, {5});
  CHECK(report.macro_recall[0] == doctest::Approx(1.0));
}

TEST_CASE("evaluate: hand-computed precision, recall, f1") {
  std::map<std::string, std::vector<std::string>> gold{{"d1", {"alpha beta", "gamma delta"}}};
  std::vector<DocExtraction> preds{
      {"d1", {"junk one", "alpha beta", "junk two", "junk three", "junk four"}, {}}};
  const auto report = evaluate(preds, gold, {5});
  CHECK(report.macro_precision[0] == doctest::Approx(0.2).epsilon(1e-9));
  CHECK(report.macro_recall[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(report.macro_f1[0] == doctest::Approx(0.285714).epsilon(1e-5));
}

TEST_CASE("evaluate: no predictions, missing gold, duplicate consumption") {
  std::map<std::string, std::vector<std::string>> gold{{"d1", {"alpha"}}};
  std::vector<DocExtraction> none{{"d1", {}, {}}};
  const auto report = evaluate(none, gold, {5});
  CHECK(report.macro_recall[0] == doctest::Approx(0.0));
  CHECK(report.macro_f1[0] == doctest::Approx(0.0));

  std::vector<DocExtraction> unknown{{"dX", {"alpha"}, {}}};
  CHECK_THROWS_WITH_AS(static_cast<void>(evaluate(unknown, gold, {5})), doctest::Contains("dX"),
                       NotFoundError);

  // A single gold phrase is consumed at most once even if predicted twice.
  std::vector<DocExtraction> dup{{"d1", {"alpha", "alphas"}, {}}};
  const auto rep2 = evaluate(dup, gold, {2});
  CHECK(rep2.macro_recall[0] == doctest::Approx(1.0));
  CHECK(rep2.macro_precision[0] == doctest::Approx(0.5));
}

TEST_CASE("evaluate: recall non-decreasing in k; metrics bounded") {
  std::mt19937_64 rng(15);
  std::vector<std::string> words{"red", "blue", "green", "cyan", "teal", "pink", "ruby"};
  std::uniform_int_distribution<int> pick(0, static_cast<int>(words.size()) - 1);
  for (int rep = 0; rep < 30; ++rep) {
    std::map<std::string, std::vector<std::string>> gold;
    std::vector<DocExtraction> preds;
    for (int d = 0; d < 3; ++d) {
      const std::string id = "d" + std::to_string(d);
      gold[id] = {words[pick(rng)], words[pick(rng)] + " " + words[pick(rng)]};
      DocExtraction e;
      e.id = id;
      for (int i = 0; i < 6; ++i) e.phrases.push_back(words[pick(rng)]);
      preds.push_back(e);
    }
    const auto report = evaluate(preds, gold, {1, 3, 5, 10});
    for (std::size_t i = 0; i < report.ks.size(); ++i) {
      CHECK(report.macro_recall[i] >= 0.0);
      CHECK(report.macro_recall[i] <= 1.0);
      CHECK(report.macro_f1[i] >= 0.0);
      CHECK(report.macro_f1[i] <= 1.0);
      if (i > 0) CHECK(report.macro_recall[i] >= report.macro_recall[i - 1]);
    }
  }
}

TEST_CASE("evaluate: perfect predictions and document permutation invariance") {
  std::map<std::string, std::vector<std::string>> gold{
      {"a", {"one two", "three"}},
      {"b", {"four"}},
  };
  std::vector<DocExtraction> preds{
      {"a", {"three", "one two"}, {}},
      {"b", {"four", "junk", "junk2"}, {}},
  };
  const auto r1 = evaluate(preds, gold, {5});
  CHECK(r1.macro_recall[0] == doctest::Approx(1.0));
  // k' = |preds| per doc: F1 = mean(2*2/(2+2), 2*1/(3+1)).
  CHECK(r1.macro_f1[0] == doctest::Approx(0.5 * (1.0 + 0.5)));

  std::reverse(preds.begin(), preds.end());
  const auto r2 = evaluate(preds, gold, {5});
  CHECK(r2.macro_recall[0] == doctest::Approx(r1.macro_recall[0]));
  CHECK(r2.macro_f1[0] == doctest::Approx(r1.macro_f1[0]));

  // When k' == |gold| and everything matches, F1 is exactly 1.
  std::vector<DocExtraction> exact{{"a", {"one two", "three"}, {}}, {"b", {"four"}, {}}};
  const auto r3 = evaluate(exact, gold, {5});
  CHECK(r3.macro_f1[0] == doctest::Approx(1.0));
}

TEST_CASE("dedup_and_sort: surface merging, max score, tie-breaks") {
  const auto doc = testing::make_doc(
      "d", {"error", "bounds", "are", "error", "bounds"});
  const std::vector<Span> spans{{0, 2}, {3, 2}, {2, 1}, {0, 1}};
  const Vec scores{1.5, 2.5, 0.5, 2.5};
  const auto scored = dedup_and_sort(doc, spans, scores);
  REQUIRE(scored.size() == 3);
  // "error bounds" occurs twice; the max score (2.5) and its span survive.
  // Tie between "error bounds"(3,2) and "error"(0,1) at 2.5: earlier span wins.
  CHECK(scored[0].surface == "error");
  CHECK(scored[0].best_span == Span{0, 1});
  CHECK(scored[1].surface == "error bounds");
  CHECK(scored[1].score == doctest::Approx(2.5));
  CHECK(scored[1].best_span == Span{3, 2});
  CHECK(scored[2].surface == "are");
  CHECK(scored[2].stemmed == "ar");
}

TEST_CASE("extract_topk: truncation and ordering invariance under monotone maps") {
  const auto doc = testing::make_doc("d", {"a", "b", "c", "d", "e", "f"});
  const auto spans = enumerate_spans(6, 1);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Vec scores(spans.size());
  for (double& s : scores) s = u(rng);

  const auto base = dedup_and_sort(doc, spans, scores);
  Vec mapped = scores;
  for (double& s : mapped) s = 3.0 * s + 11.0;  // positive affine map
  const auto transformed = dedup_and_sort(doc, spans, mapped);
  REQUIRE(base.size() == transformed.size());
  for (std::size_t i = 0; i < base.size(); ++i)
    CHECK(base[i].surface == transformed[i].surface);

  CHECK(extract_topk(base, 100).size() == base.size());
  CHECK(extract_topk(base, 1) == std::vector<std::string>{base[0].surface});
  CHECK_THROWS_AS(extract_topk(base, 0), ConfigError);
}

TEST_CASE("tfidf: hand-computed score on a two-document corpus") {
  const auto a = testing::make_labeled("a", {"x", "y", "q", "x", "y"}, {});
  const auto b = testing::make_labeled("b", {"u", "v", "w"}, {});
  const auto ranked = tfidf_baseline({a, b}, 2);
  REQUIRE(ranked.size() == 2);
  double xy_score = -1.0;
  for (const auto& sp : ranked[0]) {
    if (sp.surface == "x y") xy_score = sp.score;
  }
  // tf = 2, df = 1: 2 * ln(3/2).
  CHECK(xy_score == doctest::Approx(0.810930).epsilon(1e-5));
}

TEST_CASE("tfidf: corpus-wide phrases are suppressed; empty docs yield nothing") {
  std::vector<LabeledDocument> corpus;
  for (int i = 0; i < 4; ++i)
    corpus.push_back(testing::make_labeled("d" + std::to_string(i),
                                           {"common", "term", "u" + std::to_string(i)}, {}));
  const auto ranked = tfidf_baseline(corpus, 2);
  double common = 1e9, unique = -1e9;
  for (const auto& sp : ranked[0]) {
    if (sp.surface == "common term") common = sp.score;
    if (sp.surface == "u0") unique = sp.score;
  }
  CHECK(common == doctest::Approx(0.0));  // df == |corpus| under add-one smoothing
  CHECK(unique > common);

  LabeledDocument empty;
  empty.doc.id = "empty";
  const auto r2 = tfidf_baseline({empty}, 2);
  CHECK(r2[0].empty());
}

TEST_CASE("synth: cardinality, gold alignment oracle, determinism") {
  SynthSpec spec;
  spec.vocab_size = 150;
  spec.doc_count = 30;
  spec.min_doc_len = 20;
  spec.max_doc_len = 30;
  spec.seed = 99;
  const auto docs = synth_corpus(spec);
  REQUIRE(docs.size() == 30);
  for (const auto& ld : docs) {
    CHECK(ld.gold.size() == 3);
    // Every gold phrase aligns to at least two positive spans.
    for (const std::string& g : ld.gold) {
      const std::string gs = stemmed_phrase(g);
      int hits = 0;
      for (const Span s : align_labels(ld.doc, {g}, 5)) {
        CHECK(span_stemmed(ld.doc, s) == gs);
        ++hits;
      }
      CHECK(hits >= 2);
    }
  }

  const std::string f1 = testing::temp_path(".jsonl");
  const std::string f2 = testing::temp_path(".jsonl");
  write_synth_corpus(spec, f1);
  write_synth_corpus(spec, f2);
  CHECK(testing::read_file(f1) == testing::read_file(f2));
  CHECK_FALSE(testing::read_file(f1).empty());

  // The written file loads back with the same documents and alignments.
  const auto loaded = load_corpus(f1);
  REQUIRE(loaded.size() == docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    CHECK(loaded[i].doc.tokens == docs[i].doc.tokens);
    CHECK(loaded[i].positive_spans == docs[i].positive_spans);
  }
  std::filesystem::remove(f1);
  std::filesystem::remove(f2);

  SynthSpec bad = spec;
  bad.vocab_size = 50;
  CHECK_THROWS_AS(static_cast<void>(synth_corpus(bad)), ConfigError);
}
