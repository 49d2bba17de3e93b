#pragma once

#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "keyrank/ops.hpp"
#include "keyrank/param.hpp"

namespace keyrank {

/// Trainable stand-in for a pretrained contextual encoder: embedding lookup,
/// one residual window-3 convolution, and a pooled document projection.
struct EncoderParams {
  Parameter embedding;  // V x d
  Parameter ctx_w;      // d x 3d
  Parameter ctx_b;      // d
  Parameter doc_w;      // d x d
  Parameter doc_b;      // d

  EncoderParams(int vocab_size, int d)
      : embedding("encoder.embedding", vocab_size, d),
        ctx_w("encoder.context.W", d, 3 * d),
        ctx_b("encoder.context.b", d, 1),
        doc_w("encoder.doc_proj.W", d, d),
        doc_b("encoder.doc_proj.b", d, 1) {}

  int dim() const { return embedding.cols(); }
};

inline void embed_forward(const Parameter& table, const std::vector<int>& ids, Mat& E) {
  const int d = table.cols();
  E = Mat(static_cast<int>(ids.size()), d);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const int id = ids[i];
    if (id < 0 || id >= table.rows())
      throw DimensionError(cat("embed: token id ", id, " out of range ", table.rows()));
    const double* src = table.value.row(id);
    std::copy(src, src + d, E.row(static_cast<int>(i)));
  }
}

inline void embed_backward(Parameter& table, const std::vector<int>& ids, const Mat& gE) {
  const int d = table.cols();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    double* dst = table.grad.row(ids[i]);
    const double* src = gE.row(static_cast<int>(i));
    for (int c = 0; c < d; ++c) dst[c] += src[c];
  }
}

namespace encoder_detail {

// Concatenated window rows i-1, i, i+1 of E with zero padding at boundaries.
inline void gather_window3(const Mat& E, int i, Vec& win) {
  const int d = E.cols;
  win.assign(3 * static_cast<std::size_t>(d), 0.0);
  for (int off = -1; off <= 1; ++off) {
    const int r = i + off;
    if (r < 0 || r >= E.rows) continue;
    const double* src = E.row(r);
    std::copy(src, src + d, win.begin() + static_cast<std::size_t>(off + 1) * d);
  }
}

}  // namespace encoder_detail

/// H = E + ReLU(W [E_{i-1}; E_i; E_{i+1}] + b). Row i of H depends only on
/// rows i-1..i+1 of E.
inline void contextualize_forward(const EncoderParams& enc, const Mat& E, Mat& ctx_pre, Mat& H) {
  const int m = E.rows, d = E.cols;
  ctx_pre = Mat(m, d);
  H = Mat(m, d);
  Vec win;
  for (int i = 0; i < m; ++i) {
    encoder_detail::gather_window3(E, i, win);
    affine(enc.ctx_w.value.a.data(), enc.ctx_b.value.a.data(), win.data(), ctx_pre.row(i), d,
           3 * d);
    const double* pre = ctx_pre.row(i);
    const double* e = E.row(i);
    double* h = H.row(i);
    for (int c = 0; c < d; ++c) h[c] = e[c] + (pre[c] > 0.0 ? pre[c] : 0.0);
  }
}

inline void contextualize_backward(EncoderParams& enc, const Mat& E, const Mat& ctx_pre,
                                   const Mat& gH, Mat& gE) {
  const int m = E.rows, d = E.cols;
  Vec win, gwin(3 * static_cast<std::size_t>(d));
  Vec gpre(d);
  for (int i = 0; i < m; ++i) {
    const double* gh = gH.row(i);
    double* ge = gE.row(i);
    for (int c = 0; c < d; ++c) ge[c] += gh[c];  // residual path
    std::fill(gpre.begin(), gpre.end(), 0.0);
    relu_backward(ctx_pre.row(i), gh, gpre.data(), d);
    encoder_detail::gather_window3(E, i, win);
    std::fill(gwin.begin(), gwin.end(), 0.0);
    affine_backward(enc.ctx_w.value.a.data(), win.data(), gpre.data(), enc.ctx_w.grad.a.data(),
                    enc.ctx_b.grad.a.data(), gwin.data(), d, 3 * d);
    for (int off = -1; off <= 1; ++off) {
      const int r = i + off;
      if (r < 0 || r >= m) continue;
      double* dst = gE.row(r);
      const double* src = gwin.data() + static_cast<std::size_t>(off + 1) * d;
      for (int c = 0; c < d; ++c) dst[c] += src[c];
    }
  }
}

inline Vec mean_pool(const Mat& H) {
  if (H.rows < 1) throw DimensionError("mean_pool: empty matrix");
  Vec p(H.cols, 0.0);
  for (int i = 0; i < H.rows; ++i) {
    const double* r = H.row(i);
    for (int c = 0; c < H.cols; ++c) p[c] += r[c];
  }
  for (double& v : p) v /= H.rows;
  return p;
}

/// Mean of rows, then a trainable dense map with tanh. apply_tanh=false
/// exposes the linear stage for test fixtures.
inline void doc_repr_forward(const EncoderParams& enc, const Mat& H, Vec& pooled, Vec& pre,
                             Vec& doc_vec, bool apply_tanh = true) {
  pooled = mean_pool(H);
  pre = dense(enc.doc_w.value, enc.doc_b.value.a, pooled);
  doc_vec = pre;
  if (apply_tanh) tanh_inplace(doc_vec.data(), static_cast<int>(doc_vec.size()));
}

inline void doc_repr_backward(EncoderParams& enc, const Vec& pooled, const Vec& doc_vec,
                              const Vec& gdoc, int seq_len, Mat& gH) {
  const int d = static_cast<int>(pooled.size());
  Vec gpre(d, 0.0);
  tanh_backward(doc_vec.data(), gdoc.data(), gpre.data(), d);
  Vec gpooled(d, 0.0);
  affine_backward(enc.doc_w.value.a.data(), pooled.data(), gpre.data(), enc.doc_w.grad.a.data(),
                  enc.doc_b.grad.a.data(), gpooled.data(), d, d);
  const double inv = 1.0 / seq_len;
  for (int i = 0; i < gH.rows; ++i) {
    double* r = gH.row(i);
    for (int c = 0; c < d; ++c) r[c] += inv * gpooled[c];
  }
}

/// Externally computed contextual embeddings, keyed by document id. Rows
/// bypass the trainable encoder and receive no gradient.
class PrecomputedEmbeddings {
 public:
  PrecomputedEmbeddings() = default;

  static PrecomputedEmbeddings load(const std::string& path, int expect_dim) {
    std::ifstream in(path);
    if (!in) throw IoError(cat("cannot open embedding file: ", path));
    PrecomputedEmbeddings store;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw SchemaError(cat("embedding line ", line_no, ": malformed JSON: ", e.what()));
      }
      if (!j.contains("id") || !j["id"].is_string() || !j.contains("embeddings") ||
          !j["embeddings"].is_array())
        throw SchemaError(cat("embedding line ", line_no, ": need fields id, embeddings"));
      const auto& rows = j["embeddings"];
      Mat h(static_cast<int>(rows.size()), expect_dim);
      int r = 0;
      for (const auto& row : rows) {
        if (!row.is_array() || static_cast<int>(row.size()) != expect_dim)
          throw SchemaError(cat("embedding line ", line_no, ": row ", r, " width ", row.size(),
                                " != expected ", expect_dim));
        int c = 0;
        for (const auto& v : row) h(r, c++) = v.get<double>();
        ++r;
      }
      require_finite(h, cat("embeddings for '", j["id"].get<std::string>(), "'"));
      store.by_id_[j["id"].get<std::string>()] = std::move(h);
    }
    return store;
  }

  bool contains(const std::string& id) const { return by_id_.count(id) > 0; }

  const Mat& get(const std::string& id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end())
      throw NotFoundError(cat("no precomputed embeddings for document '", id, "'"));
    return it->second;
  }

  std::size_t size() const { return by_id_.size(); }

 private:
  std::unordered_map<std::string, Mat> by_id_;
};

}  // namespace keyrank
