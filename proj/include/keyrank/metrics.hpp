#pragma once

#include <algorithm>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "keyrank/corpus.hpp"
#include "keyrank/extract.hpp"

namespace keyrank {

/// Macro recall / F1 at each cutoff, plus the per-document extraction lists
/// the numbers were computed from.
struct EvalReport {
  std::vector<int> ks;
  std::vector<double> macro_recall;     // parallel to ks
  std::vector<double> macro_precision;  // parallel to ks
  std::vector<double> macro_f1;         // parallel to ks
  int doc_count = 0;
  std::vector<DocExtraction> per_doc;
};

namespace metrics_detail {

/// Matches at cutoff k: predictions compared to gold by full-phrase stem
/// equality, each gold phrase consumable at most once.
inline int matches_at_k(const std::vector<std::string>& pred_stems,
                        const std::vector<std::string>& gold_stems, int k) {
  std::vector<bool> used(gold_stems.size(), false);
  int matches = 0;
  const int limit = std::min<int>(k, static_cast<int>(pred_stems.size()));
  for (int i = 0; i < limit; ++i) {
    for (std::size_t g = 0; g < gold_stems.size(); ++g) {
      if (!used[g] && gold_stems[g] == pred_stems[i]) {
        used[g] = true;
        ++matches;
        break;
      }
    }
  }
  return matches;
}

}  // namespace metrics_detail

/// Precision uses k' = min(k, |predictions|) as the denominator so documents
/// with fewer than k candidates are not penalized.
inline EvalReport evaluate(const std::vector<DocExtraction>& predictions,
                           const std::map<std::string, std::vector<std::string>>& gold,
                           const std::vector<int>& ks) {
  if (ks.empty()) throw ConfigError("evaluate: no cutoffs given");
  for (const int k : ks) {
    if (k < 1) throw ConfigError("evaluate: cutoffs must be >= 1");
  }
  EvalReport report;
  report.ks = ks;
  report.macro_recall.assign(ks.size(), 0.0);
  report.macro_precision.assign(ks.size(), 0.0);
  report.macro_f1.assign(ks.size(), 0.0);
  report.per_doc = predictions;
  report.doc_count = static_cast<int>(predictions.size());

  for (const DocExtraction& doc : predictions) {
    auto it = gold.find(doc.id);
    if (it == gold.end())
      throw NotFoundError(cat("evaluate: no gold keyphrases for document '", doc.id, "'"));
    std::vector<std::string> gold_stems;
    gold_stems.reserve(it->second.size());
    for (const std::string& g : it->second) gold_stems.push_back(stemmed_phrase(g));
    std::vector<std::string> pred_stems;
    pred_stems.reserve(doc.phrases.size());
    for (const std::string& p : doc.phrases) pred_stems.push_back(stemmed_phrase(p));

    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
      const int k_eff = std::min<int>(ks[ki], static_cast<int>(pred_stems.size()));
      const int matched = metrics_detail::matches_at_k(pred_stems, gold_stems, ks[ki]);
      const double p = k_eff > 0 ? static_cast<double>(matched) / k_eff : 0.0;
      const double r =
          gold_stems.empty() ? 0.0 : static_cast<double>(matched) / gold_stems.size();
      const double f1 = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
      report.macro_precision[ki] += p;
      report.macro_recall[ki] += r;
      report.macro_f1[ki] += f1;
    }
  }
  if (report.doc_count > 0) {
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
      report.macro_precision[ki] /= report.doc_count;
      report.macro_recall[ki] /= report.doc_count;
      report.macro_f1[ki] /= report.doc_count;
    }
  }
  return report;
}

inline std::map<std::string, std::vector<std::string>> gold_by_id(
    const std::vector<LabeledDocument>& docs) {
  std::map<std::string, std::vector<std::string>> m;
  for (const LabeledDocument& d : docs) m[d.doc.id] = d.gold;
  return m;
}

inline std::string format_table(const EvalReport& r) {
  std::ostringstream os;
  os << "docs: " << r.doc_count << '\n';
  os << std::left << std::setw(6) << "k" << std::setw(12) << "recall" << std::setw(12) << "f1"
     << '\n';
  os << std::fixed << std::setprecision(4);
  for (std::size_t i = 0; i < r.ks.size(); ++i) {
    os << std::left << std::setw(6) << r.ks[i] << std::setw(12) << r.macro_recall[i]
       << std::setw(12) << r.macro_f1[i] << '\n';
  }
  return os.str();
}

inline std::string format_csv(const EvalReport& r) {
  std::ostringstream os;
  os << "k,recall,f1\n" << std::setprecision(17);
  for (std::size_t i = 0; i < r.ks.size(); ++i) {
    os << r.ks[i] << ',' << r.macro_recall[i] << ',' << r.macro_f1[i] << '\n';
  }
  return os.str();
}

inline std::string format_json(const EvalReport& r) {
  nlohmann::json metrics = nlohmann::json::array();
  for (std::size_t i = 0; i < r.ks.size(); ++i) {
    metrics.push_back({{"k", r.ks[i]},
                       {"recall", r.macro_recall[i]},
                       {"f1", r.macro_f1[i]}});
  }
  return nlohmann::json{{"docs", r.doc_count}, {"metrics", metrics}}.dump();
}

}  // namespace keyrank
