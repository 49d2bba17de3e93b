#include <cstdio>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "keyrank/keyrank.hpp"

namespace {

using namespace keyrank;

std::vector<int> parse_ks(const std::string& spec) {
  std::vector<int> ks;
  std::string cur;
  for (const char c : spec + ",") {
    if (c == ',') {
      if (!cur.empty()) {
        ks.push_back(std::stoi(cur));
        cur.clear();
      }
    } else {
      cur.push_back(c);
    }
  }
  if (ks.empty()) throw ConfigError("no cutoffs given to --ks");
  return ks;
}

int run_train(const std::string& config_path, const std::string& data_override,
              const std::string& out_dir, bool has_seed, std::uint64_t seed, bool quiet) {
  TrainConfig cfg = load_train_config(config_path);
  if (!data_override.empty()) cfg.train_data = data_override;
  if (has_seed) cfg.seed = seed;
  cfg.validate();
  if (cfg.train_data.empty())
    throw ConfigError("no dataset: set train_data in the config or pass --data");

  const auto corpus = load_corpus(cfg.train_data, cfg.corpus_options());
  if (corpus.empty()) throw ConfigError(cat("dataset is empty: ", cfg.train_data));
  Vocabulary vocab = build_vocab(corpus, cfg.min_count);

  std::unique_ptr<PrecomputedEmbeddings> pre;
  if (!cfg.precomputed_embeddings.empty())
    pre = std::make_unique<PrecomputedEmbeddings>(
        PrecomputedEmbeddings::load(cfg.precomputed_embeddings, cfg.embed_dim));

  Model model(cfg.model_dims(vocab.size()), std::move(vocab), cfg.seed);
  Trainer trainer(model, cfg, pre.get());
  const TrainState state = trainer.train(corpus, out_dir, !quiet);
  if (!quiet) {
    std::fprintf(stderr, "done: %d epochs, %ld steps, final loss %.6f\n", state.epoch, state.step,
                 state.last_epoch.total);
  }
  std::printf("%s\n",
              nlohmann::json{{"epochs", state.epoch},
                             {"steps", state.step},
                             {"final_loss", state.last_epoch.total},
                             {"model", out_dir + "/model.ckpt.json"}}
                  .dump()
                  .c_str());
  return 0;
}

int run_extract(const std::string& model_path, const std::string& input_path, int topk,
                const std::string& out_path, const std::string& embeddings_path) {
  Model model = load_checkpoint(model_path);
  CorpusOptions opts;
  opts.max_phrase_len = model.dims().max_phrase_len;
  opts.require_gold = false;
  const auto docs = load_corpus(input_path, opts);
  std::unique_ptr<PrecomputedEmbeddings> pre;
  if (!embeddings_path.empty())
    pre = std::make_unique<PrecomputedEmbeddings>(
        PrecomputedEmbeddings::load(embeddings_path, model.dims().embed_dim));
  write_extractions(extract_corpus(model, docs, topk, pre.get()), out_path);
  return 0;
}

int run_eval(const std::string& pred_path, const std::string& gold_path, const std::string& ks,
             const std::string& format) {
  const auto preds = read_extractions(pred_path);
  CorpusOptions opts;
  const auto gold_docs = load_corpus(gold_path, opts);
  const EvalReport report = evaluate(preds, gold_by_id(gold_docs), parse_ks(ks));
  if (format == "table") {
    std::cout << format_table(report);
  } else if (format == "csv") {
    std::cout << format_csv(report);
  } else if (format == "json") {
    std::cout << format_json(report) << '\n';
  } else {
    throw ConfigError(cat("unknown --format '", format, "' (table|csv|json)"));
  }
  return 0;
}

int run_gradcheck(double tolerance) {
  const GradSuiteResult result = run_gradient_suite();
  for (const GradCheckEntry& e : result.report.entries) {
    std::printf("%-28s max_rel_err %.3e  evals %ld\n", e.name.c_str(), e.max_rel_err, e.evals);
  }
  std::printf("overall max_rel_err %.3e  tolerance %.3e  runtime %.1fs  %s\n",
              result.report.max_rel_err, tolerance, result.seconds,
              result.pass(tolerance) ? "PASS" : "FAIL");
  return result.pass(tolerance) ? 0 : 1;
}

int run_synth(const std::string& spec_path, const std::string& out_path) {
  write_synth_corpus(load_synth_spec(spec_path), out_path);
  return 0;
}

int run_tfidf(const std::string& input_path, int topk, const std::string& out_path,
              int max_phrase_len) {
  CorpusOptions opts;
  opts.max_phrase_len = max_phrase_len;
  opts.require_gold = false;
  const auto docs = load_corpus(input_path, opts);
  write_extractions(tfidf_extract(docs, max_phrase_len, topk), out_path);
  return 0;
}

const char* error_kind(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return "config";
  if (dynamic_cast<const SchemaError*>(&e)) return "schema";
  if (dynamic_cast<const IoError*>(&e)) return "io";
  if (dynamic_cast<const NotFoundError*>(&e)) return "not_found";
  if (dynamic_cast<const DimensionError*>(&e)) return "dimension";
  if (dynamic_cast<const DomainError*>(&e)) return "domain";
  return "internal";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"keyrank: multi-perspective keyphrase extraction"};
  app.require_subcommand(1);

  std::string config_path, data_override, out_dir = "run";
  std::uint64_t seed = 0;
  bool quiet = false;
  auto* train = app.add_subcommand("train", "train a model from a JSONL dataset");
  train->add_option("--config", config_path, "training config JSON")->required();
  auto* seed_opt = train->add_option("--seed", seed, "override the config seed");
  train->add_option("--out", out_dir, "run directory for checkpoints");
  train->add_option("--data", data_override, "override the config train_data path");
  train->add_flag("--quiet", quiet, "suppress progress output");

  std::string model_path, input_path, out_path, embeddings_path;
  int topk = 5;
  auto* extract = app.add_subcommand("extract", "rank and extract keyphrases");
  extract->add_option("--model", model_path, "model checkpoint")->required();
  extract->add_option("--input", input_path, "input JSONL documents")->required();
  extract->add_option("--topk", topk, "phrases to keep per document")->required();
  extract->add_option("--out", out_path, "output JSONL path")->required();
  extract->add_option("--embeddings", embeddings_path, "precomputed embedding JSONL");

  std::string pred_path, gold_path, ks = "1,3,5,10", format = "table";
  auto* eval = app.add_subcommand("eval", "score predictions against gold keyphrases");
  eval->add_option("--pred", pred_path, "prediction JSONL")->required();
  eval->add_option("--gold", gold_path, "gold dataset JSONL")->required();
  eval->add_option("--ks", ks, "comma-separated cutoffs");
  eval->add_option("--format", format, "table|csv|json");

  double tolerance = 1e-5;
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient suite");
  gradcheck->add_option("--tolerance", tolerance, "max relative error");

  std::string spec_path;
  auto* synth = app.add_subcommand("synth-data", "generate a synthetic labeled corpus");
  synth->add_option("--spec", spec_path, "generator spec JSON")->required();
  synth->add_option("--out", out_path, "output JSONL path")->required();

  int max_phrase_len = 5;
  auto* tfidf = app.add_subcommand("baseline-tfidf", "tf-idf ranking baseline");
  tfidf->add_option("--input", input_path, "input JSONL documents")->required();
  tfidf->add_option("--topk", topk, "phrases to keep per document")->required();
  tfidf->add_option("--out", out_path, "output JSONL path")->required();
  tfidf->add_option("--max-phrase-len", max_phrase_len, "maximum candidate length");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    std::cerr << nlohmann::json{{"error", e.what()}, {"kind", "usage"}}.dump() << '\n';
    return 1;
  }

  try {
    if (train->parsed())
      return run_train(config_path, data_override, out_dir, seed_opt->count() > 0, seed, quiet);
    if (extract->parsed())
      return run_extract(model_path, input_path, topk, out_path, embeddings_path);
    if (eval->parsed()) return run_eval(pred_path, gold_path, ks, format);
    if (gradcheck->parsed()) return run_gradcheck(tolerance);
    if (synth->parsed()) return run_synth(spec_path, out_path);
    if (tfidf->parsed()) return run_tfidf(input_path, topk, out_path, max_phrase_len);
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", e.what()}, {"kind", error_kind(e)}}.dump() << '\n';
    return 1;
  }
  return 0;
}
