#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "keyrank/corpus.hpp"
#include "keyrank/ops.hpp"
#include "keyrank/param.hpp"

namespace keyrank {

struct CandidatePhrase {
  Span span;
  Vec repr;
  std::string surface;
  std::string stemmed;
};

/// All spans (i, n) with n <= min(max_n, seq_len), n ascending then i
/// ascending.
inline std::vector<Span> enumerate_spans(int seq_len, int max_n) {
  if (seq_len < 1 || max_n < 1) throw ConfigError("enumerate_spans: seq_len and max_n must be >= 1");
  std::vector<Span> spans;
  for (int n = 1; n <= std::min(max_n, seq_len); ++n) {
    for (int i = 0; i + n <= seq_len; ++i) spans.push_back(Span{i, n});
  }
  return spans;
}

inline std::size_t span_count(int seq_len, int max_n) {
  std::size_t c = 0;
  for (int n = 1; n <= std::min(max_n, seq_len); ++n) c += static_cast<std::size_t>(seq_len - n + 1);
  return c;
}

/// Per-length affine filter mapping a concatenated n-token window (n*d) to d.
struct ConvFilter {
  Parameter w;  // d x (n*d)
  Parameter b;  // d

  ConvFilter(const std::string& prefix, int d, int n)
      : w(prefix + ".W", d, n * d), b(prefix + ".b", d, 1) {}
};

/// One filter set per n-gram length 1..max_n.
struct NGramComposer {
  std::vector<ConvFilter> filters;

  NGramComposer(int d, int max_n) {
    filters.reserve(max_n);
    for (int n = 1; n <= max_n; ++n) filters.emplace_back(cat("ngram.", n), d, n);
  }

  int max_n() const { return static_cast<int>(filters.size()); }
  int dim() const { return filters.empty() ? 0 : filters[0].w.rows(); }
};

/// ReLU-activated affine map of the window H[i .. i+n); one filter set per n.
inline Vec conv_window(const Mat& H, const ConvFilter& filter, int n, int i) {
  const int d = H.cols;
  if (i < 0 || n < 1 || i + n > H.rows)
    throw DimensionError(cat("conv_window: span (", i, ",", n, ") exceeds sequence of ", H.rows));
  if (filter.w.cols() != n * d)
    throw DimensionError(cat("conv_window: filter expects width ", filter.w.cols(), ", window is ",
                             n * d));
  Vec out(d);
  // Window rows are contiguous in a row-major H.
  affine(filter.w.value.a.data(), filter.b.value.a.data(), H.row(i), out.data(), d, n * d);
  relu(out.data(), out.data(), d);
  return out;
}

/// Representations for every span; pre holds the pre-ReLU activations.
inline void compose_forward(const NGramComposer& composer, const Mat& H,
                            const std::vector<Span>& spans, Mat& pre, Mat& repr) {
  const int d = H.cols;
  if (composer.dim() != d)
    throw DimensionError(cat("compose: composer width ", composer.dim(), " != H width ", d));
  pre = Mat(static_cast<int>(spans.size()), d);
  repr = Mat(static_cast<int>(spans.size()), d);
  for (std::size_t k = 0; k < spans.size(); ++k) {
    const Span s = spans[k];
    const ConvFilter& f = composer.filters[s.length - 1];
    affine(f.w.value.a.data(), f.b.value.a.data(), H.row(s.start),
           pre.row(static_cast<int>(k)), d, s.length * d);
    relu(pre.row(static_cast<int>(k)), repr.row(static_cast<int>(k)), d);
  }
}

inline void compose_backward(NGramComposer& composer, const Mat& H,
                             const std::vector<Span>& spans, const Mat& pre, const Mat& grepr,
                             Mat& gH) {
  const int d = H.cols;
  Vec gpre(d);
  for (std::size_t k = 0; k < spans.size(); ++k) {
    const Span s = spans[k];
    ConvFilter& f = composer.filters[s.length - 1];
    std::fill(gpre.begin(), gpre.end(), 0.0);
    relu_backward(pre.row(static_cast<int>(k)), grepr.row(static_cast<int>(k)), gpre.data(), d);
    affine_backward(f.w.value.a.data(), H.row(s.start), gpre.data(), f.w.grad.a.data(),
                    f.b.grad.a.data(), gH.row(s.start), d, s.length * d);
  }
}

/// Attaches surfaces and stems to composed span representations.
inline std::vector<CandidatePhrase> make_candidates(const Document& doc,
                                                    const std::vector<Span>& spans,
                                                    const Mat& repr) {
  std::vector<CandidatePhrase> out;
  out.reserve(spans.size());
  for (std::size_t k = 0; k < spans.size(); ++k) {
    CandidatePhrase c;
    c.span = spans[k];
    c.repr.assign(repr.row(static_cast<int>(k)), repr.row(static_cast<int>(k)) + repr.cols);
    c.surface = span_surface(doc, spans[k]);
    c.stemmed = span_stemmed(doc, spans[k]);
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace keyrank
