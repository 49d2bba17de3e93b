#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "keyrank/candidates.hpp"
#include "keyrank/corpus.hpp"
#include "keyrank/encoder.hpp"
#include "keyrank/heads.hpp"
#include "keyrank/vocab.hpp"

namespace keyrank {

struct ModelDims {
  int vocab_size = 0;
  int embed_dim = 64;
  int concept_dim = 16;
  int max_phrase_len = 5;
};

/// Margins and mixing weights of the joint objective.
struct LossParams {
  double delta1 = 1.0;
  double delta2 = 1.0;
  double lambda = 0.5;
  double epsilon1 = 1.0 / 3.0;
  double epsilon2 = 1.0 / 3.0;
  double epsilon3 = 1.0 / 3.0;
};

/// Upstream weights applied to each loss term in the backward pass; the 1/b
/// factor for document-averaged batches is folded in by `from`.
struct LossWeights {
  double chunk = 0.0;
  double rank = 0.0;
  double match = 0.0;
  double vae_doc = 0.0;
  double vae_phrase = 0.0;

  static LossWeights from(const LossParams& p, int batch_docs) {
    const double inv = 1.0 / batch_docs;
    LossWeights w;
    w.chunk = p.epsilon1 * inv;
    w.rank = p.epsilon2 * inv;
    w.match = p.epsilon3 * inv;
    w.vae_doc = p.epsilon3 * p.lambda * inv;
    w.vae_phrase = p.epsilon3 * (1.0 - p.lambda) * inv;
    return w;
  }
};

struct LossBreakdown {
  double chunk = 0.0;      // L_c
  double rank = 0.0;       // L_r
  double match = 0.0;      // L_m
  double vae_doc = 0.0;    // L_d
  double vae_phrase = 0.0; // L_k
  double matching = 0.0;   // L_t
  double total = 0.0;      // L
  bool pair_skip = false;  // no positive or no negative candidates
};

/// Deterministic per-document sampling plan: the hinge/triplet pairs, the
/// candidates run through the phrase VAE, and all Gaussian noise draws.
struct TrainPlan {
  PairSet pairs;
  std::vector<int> vae_candidates;  // sorted unique candidate indices
  Vec eps_doc;
  std::vector<Vec> eps_phrase;  // parallel to vae_candidates
};

namespace model_detail {

struct VaeCache {
  Vec x;
  Vec mu_hpre, mu_h, mu;
  Vec ls_hpre, ls_h, logsig, sigma;
  Vec eps, z;
  Vec dec_hpre, dec_h, recon;
  double kl = 0.0;
  double rec = 0.0;

  double loss() const { return rec + kl; }
};

inline VaeCache vae_forward(const ConceptVae& vae, LatentKind kind, Vec x, Vec eps) {
  VaeCache c;
  c.x = std::move(x);
  c.eps = std::move(eps);
  c.mu = vae.mu_net(kind).forward(c.x, c.mu_hpre, c.mu_h);
  c.logsig = vae.logsig_net(kind).forward(c.x, c.ls_hpre, c.ls_h);
  c.sigma.resize(c.logsig.size());
  for (std::size_t j = 0; j < c.logsig.size(); ++j) c.sigma[j] = std::exp(c.logsig[j]);
  c.z = reparameterize(c.mu, c.sigma, c.eps);
  c.recon = vae.decoder(kind).forward(c.z, c.dec_hpre, c.dec_h);
  c.kl = gaussian_kl(c.mu, c.sigma);
  c.rec = mse(c.x, c.recon);
  return c;
}

/// g_loss weights the (MSE + KL) objective; gz_extra carries gradient flowing
/// into z from the bilinear match. Adds the input gradient into gx.
inline void vae_backward(ConceptVae& vae, LatentKind kind, const VaeCache& c, double g_loss,
                         const Vec& gz_extra, Vec& gx) {
  const std::size_t cd = c.mu.size();
  Vec gz = gz_extra.empty() ? Vec(cd, 0.0) : gz_extra;
  Vec gmu(cd, 0.0), gsigma(cd, 0.0);
  if (g_loss != 0.0) {
    Vec grecon(c.recon.size(), 0.0);
    mse_backward(c.x, c.recon, g_loss, gx, grecon);
    vae.decoder(kind).backward(c.z, c.dec_hpre, c.dec_h, grecon, gz);
    gaussian_kl_backward(c.mu, c.sigma, g_loss, gmu, gsigma);
  }
  reparameterize_backward(c.eps, gz, gmu, gsigma);
  Vec glogsig(cd);
  for (std::size_t j = 0; j < cd; ++j) glogsig[j] = gsigma[j] * c.sigma[j];
  vae.mu_net(kind).backward(c.x, c.mu_hpre, c.mu_h, gmu, gx);
  vae.logsig_net(kind).backward(c.x, c.ls_hpre, c.ls_h, glogsig, gx);
}

}  // namespace model_detail

/// Every activation of one training document, kept for the backward pass.
struct ForwardCache {
  std::vector<int> ids;
  int seq_len = 0;
  bool frozen_h = false;  // precomputed embeddings: no encoder gradient

  Mat E, ctx_pre, H;
  Vec pooled, doc_vec;

  std::vector<Span> spans;
  std::vector<int> labels;
  Mat cand_pre, cand_repr;

  Mat chunk_probs;   // num_cand x 2
  Vec rank_scores;   // num_cand

  TrainPlan plan;
  LossParams loss_params;
  model_detail::VaeCache doc_vae;
  std::vector<model_detail::VaeCache> phrase_vae;  // parallel to plan.vae_candidates
  Vec i3;  // full candidate-indexed vector, filled at pair members

  LossBreakdown losses;
};

class Model {
 public:
  Model(ModelDims dims, Vocabulary vocab, std::uint64_t seed)
      : dims_(dims),
        vocab_(std::move(vocab)),
        enc_(dims.vocab_size > 0 ? dims.vocab_size : vocab_.size(), dims.embed_dim),
        composer_(dims.embed_dim, dims.max_phrase_len),
        chunk_(dims.embed_dim),
        rank_(dims.embed_dim),
        vae_(dims.embed_dim, dims.concept_dim) {
    dims_.vocab_size = enc_.embedding.rows();
    if (dims_.vocab_size != vocab_.size())
      throw ConfigError(cat("model vocab_size ", dims_.vocab_size, " != vocabulary size ",
                            vocab_.size()));
    build_registry();
    init_params(seed);
  }

  const ModelDims& dims() const { return dims_; }
  const Vocabulary& vocab() const { return vocab_; }

  const std::vector<Parameter*>& parameters() { return registry_; }
  Parameter* param(const std::string& name) { return find_param(registry_, name); }

  EncoderParams& encoder() { return enc_; }
  NGramComposer& composer() { return composer_; }
  ChunkHead& chunk_head() { return chunk_; }
  RankHead& rank_head() { return rank_; }
  ConceptVae& vae() { return vae_; }
  const EncoderParams& encoder() const { return enc_; }
  const ConceptVae& vae() const { return vae_; }

  std::vector<int> token_ids(const Document& doc) const {
    std::vector<int> ids;
    ids.reserve(doc.tokens.size());
    for (const std::string& t : doc.tokens) ids.push_back(vocab_.id_of(t));
    return ids;
  }

  /// Fills ids/E/ctx_pre/H (or a frozen precomputed H) plus the pooled
  /// document vector.
  void encode(const Document& doc, const PrecomputedEmbeddings* pre, ForwardCache& fc) const {
    fc.seq_len = static_cast<int>(doc.tokens.size());
    if (pre != nullptr && pre->contains(doc.id)) {
      fc.H = pre->get(doc.id);
      if (fc.H.rows != fc.seq_len)
        throw SchemaError(cat("precomputed embeddings for '", doc.id, "' have ", fc.H.rows,
                              " rows, document has ", fc.seq_len, " tokens"));
      if (fc.H.cols != dims_.embed_dim)
        throw SchemaError(cat("precomputed embeddings for '", doc.id, "' have width ", fc.H.cols,
                              ", model width is ", dims_.embed_dim));
      fc.frozen_h = true;
    } else {
      fc.ids = token_ids(doc);
      embed_forward(enc_.embedding, fc.ids, fc.E);
      contextualize_forward(enc_, fc.E, fc.ctx_pre, fc.H);
      fc.frozen_h = false;
    }
    Vec pre_act;
    doc_repr_forward(enc_, fc.H, fc.pooled, pre_act, fc.doc_vec);
  }

  ForwardCache forward_train(const LabeledDocument& ld, TrainPlan plan, const LossParams& lp,
                             const PrecomputedEmbeddings* pre = nullptr) const {
    ForwardCache fc;
    fc.plan = std::move(plan);
    fc.loss_params = lp;
    encode(ld.doc, pre, fc);

    fc.spans = enumerate_spans(fc.seq_len, dims_.max_phrase_len);
    fc.labels.resize(fc.spans.size());
    for (std::size_t k = 0; k < fc.spans.size(); ++k) {
      fc.labels[k] = std::binary_search(ld.positive_spans.begin(), ld.positive_spans.end(),
                                        fc.spans[k])
                         ? 1
                         : 0;
    }
    compose_forward(composer_, fc.H, fc.spans, fc.cand_pre, fc.cand_repr);

    const int n_cand = static_cast<int>(fc.spans.size());
    const int d = dims_.embed_dim;

    fc.chunk_probs = Mat(n_cand, 2);
    fc.rank_scores.assign(n_cand, 0.0);
    Vec logits(2);
    for (int k = 0; k < n_cand; ++k) {
      const double* r = fc.cand_repr.row(k);
      affine(chunk_.w.value.a.data(), chunk_.b.value.a.data(), r, logits.data(), 2, d);
      Vec p = softmax(logits);
      fc.chunk_probs(k, 0) = p[0];
      fc.chunk_probs(k, 1) = p[1];
      affine(rank_.w.value.a.data(), rank_.b.value.a.data(), r, &fc.rank_scores[k], 1, d);
    }

    fc.losses.chunk = chunk_loss(fc.chunk_probs, fc.labels);
    fc.losses.rank = rank_loss(fc.plan.pairs, fc.rank_scores, lp.delta1);
    fc.losses.pair_skip = fc.plan.pairs.pairs.empty();

    fc.doc_vae = model_detail::vae_forward(vae_, LatentKind::Document, fc.doc_vec,
                                           fc.plan.eps_doc);
    fc.losses.vae_doc = fc.doc_vae.loss();

    fc.i3.assign(n_cand, 0.0);
    fc.phrase_vae.clear();
    fc.phrase_vae.reserve(fc.plan.vae_candidates.size());
    double phrase_loss = 0.0;
    for (std::size_t k = 0; k < fc.plan.vae_candidates.size(); ++k) {
      const int c = fc.plan.vae_candidates[k];
      Vec x(fc.cand_repr.row(c), fc.cand_repr.row(c) + d);
      fc.phrase_vae.push_back(model_detail::vae_forward(vae_, LatentKind::Phrase, std::move(x),
                                                        fc.plan.eps_phrase[k]));
      phrase_loss += fc.phrase_vae.back().loss();
      fc.i3[c] = concept_match(fc.phrase_vae.back().z, fc.doc_vae.z, vae_.match_w.value);
    }
    fc.losses.vae_phrase =
        fc.plan.vae_candidates.empty() ? 0.0 : phrase_loss / fc.plan.vae_candidates.size();
    fc.losses.match = match_triplet_loss(fc.plan.pairs, fc.i3, lp.delta2);
    fc.losses.matching =
        matching_total(fc.losses.match, fc.losses.vae_doc, fc.losses.vae_phrase, lp.lambda);
    fc.losses.total = joint_loss(fc.losses.chunk, fc.losses.rank, fc.losses.matching, lp.epsilon1,
                                 lp.epsilon2, lp.epsilon3);
    return fc;
  }

  /// Accumulates gradients for one cached document into the parameters.
  void backward(const ForwardCache& fc, const LossWeights& w) {
    const int n_cand = static_cast<int>(fc.spans.size());
    const int d = dims_.embed_dim;
    const int cd = dims_.concept_dim;

    Mat grepr(n_cand, d);
    Mat gH(fc.H.rows, d);
    Vec gdoc_vec(d, 0.0);
    Vec gz_doc(cd, 0.0);

    if (w.chunk != 0.0) {
      const double g = w.chunk / n_cand;
      Vec glogits(2), probs(2);
      for (int k = 0; k < n_cand; ++k) {
        probs[0] = fc.chunk_probs(k, 0);
        probs[1] = fc.chunk_probs(k, 1);
        glogits[0] = glogits[1] = 0.0;
        softmax_ce_backward(probs, fc.labels[k], g, glogits);
        affine_backward(chunk_.w.value.a.data(), fc.cand_repr.row(k), glogits.data(),
                        chunk_.w.grad.a.data(), chunk_.b.grad.a.data(), grepr.row(k), 2, d);
      }
    }

    const auto& pairs = fc.plan.pairs.pairs;
    if (w.rank != 0.0 && !pairs.empty()) {
      Vec gscore(n_cand, 0.0);
      const double g = w.rank / static_cast<double>(pairs.size());
      for (const auto& [p, n] : pairs)
        hinge_pair_backward(fc.rank_scores[p], fc.rank_scores[n], fc.loss_params.delta1, g,
                            gscore[p], gscore[n]);
      for (int k = 0; k < n_cand; ++k) {
        if (gscore[k] == 0.0) continue;
        affine_backward(rank_.w.value.a.data(), fc.cand_repr.row(k), &gscore[k],
                        rank_.w.grad.a.data(), rank_.b.grad.a.data(), grepr.row(k), 1, d);
      }
    }

    // Bilinear match gradient into phrase and document latents.
    std::vector<Vec> gz_phrase(fc.plan.vae_candidates.size());
    if (w.match != 0.0 && !pairs.empty()) {
      Vec gi3(n_cand, 0.0);
      const double g = w.match / static_cast<double>(pairs.size());
      for (const auto& [p, n] : pairs)
        triplet_backward(fc.i3[p], fc.i3[n], fc.loss_params.delta2, g, gi3[p], gi3[n]);
      const Mat& w3 = vae_.match_w.value;
      for (std::size_t k = 0; k < fc.plan.vae_candidates.size(); ++k) {
        const int c = fc.plan.vae_candidates[k];
        const double gc = gi3[c];
        if (gc == 0.0) continue;
        const Vec& zp = fc.phrase_vae[k].z;
        const Vec& zd = fc.doc_vae.z;
        if (gz_phrase[k].empty()) gz_phrase[k].assign(cd, 0.0);
        for (int r = 0; r < cd; ++r) {
          const double* w3r = w3.row(r);
          double* gw3r = vae_.match_w.grad.row(r);
          double acc = 0.0;
          for (int col = 0; col < cd; ++col) {
            acc += w3r[col] * zd[col];
            gw3r[col] += gc * zp[r] * zd[col];
            gz_doc[col] += gc * zp[r] * w3r[col];
          }
          gz_phrase[k][r] += gc * acc;
        }
      }
    }

    const double g_phrase =
        fc.plan.vae_candidates.empty() ? 0.0
                                       : w.vae_phrase / static_cast<double>(fc.plan.vae_candidates.size());
    for (std::size_t k = 0; k < fc.plan.vae_candidates.size(); ++k) {
      if (g_phrase == 0.0 && gz_phrase[k].empty()) continue;
      const int c = fc.plan.vae_candidates[k];
      Vec gx(d, 0.0);
      model_detail::vae_backward(vae_, LatentKind::Phrase, fc.phrase_vae[k], g_phrase,
                                 gz_phrase[k], gx);
      double* gr = grepr.row(c);
      for (int j = 0; j < d; ++j) gr[j] += gx[j];
    }

    const bool doc_vae_active = w.vae_doc != 0.0 || std::any_of(gz_doc.begin(), gz_doc.end(),
                                                                [](double v) { return v != 0.0; });
    if (doc_vae_active)
      model_detail::vae_backward(vae_, LatentKind::Document, fc.doc_vae, w.vae_doc, gz_doc,
                                 gdoc_vec);

    compose_backward(composer_, fc.H, fc.spans, fc.cand_pre, grepr, gH);
    doc_repr_backward(enc_, fc.pooled, fc.doc_vec, gdoc_vec, fc.seq_len, gH);

    if (!fc.frozen_h) {
      Mat gE(fc.E.rows, d);
      contextualize_backward(enc_, fc.E, fc.ctx_pre, gH, gE);
      embed_backward(enc_.embedding, fc.ids, gE);
    }
  }

  struct SpanScores {
    std::vector<Span> spans;
    Vec scores;
  };

  /// Inference path: saliency scores only. Chunking and concept-matching
  /// parameters are never touched here.
  SpanScores rank_spans(const Document& doc, const PrecomputedEmbeddings* pre = nullptr) const {
    SpanScores out;
    if (doc.tokens.empty()) return out;
    ForwardCache fc;
    encode(doc, pre, fc);
    out.spans = enumerate_spans(fc.seq_len, dims_.max_phrase_len);
    Mat cand_pre, cand_repr;
    compose_forward(composer_, fc.H, out.spans, cand_pre, cand_repr);
    out.scores.resize(out.spans.size());
    for (std::size_t k = 0; k < out.spans.size(); ++k) {
      affine(rank_.w.value.a.data(), rank_.b.value.a.data(), cand_repr.row(static_cast<int>(k)),
             &out.scores[k], 1, dims_.embed_dim);
    }
    return out;
  }

 private:
  void build_registry() {
    registry_ = {&enc_.embedding, &enc_.ctx_w, &enc_.ctx_b, &enc_.doc_w, &enc_.doc_b};
    for (ConvFilter& f : composer_.filters) {
      registry_.push_back(&f.w);
      registry_.push_back(&f.b);
    }
    registry_.push_back(&chunk_.w);
    registry_.push_back(&chunk_.b);
    registry_.push_back(&rank_.w);
    registry_.push_back(&rank_.b);
    for (Mlp2* net : {&vae_.doc_mu, &vae_.doc_logsig, &vae_.phr_mu, &vae_.phr_logsig,
                      &vae_.doc_dec, &vae_.phr_dec}) {
      registry_.push_back(&net->w1);
      registry_.push_back(&net->b1);
      registry_.push_back(&net->w2);
      registry_.push_back(&net->b2);
    }
    registry_.push_back(&vae_.match_w);
  }

  void init_params(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (Parameter* p : registry_) {
      if (p->cols() == 1) continue;  // biases start at zero
      init_glorot(*p, rng);
    }
  }

  ModelDims dims_;
  Vocabulary vocab_;
  EncoderParams enc_;
  NGramComposer composer_;
  ChunkHead chunk_;
  RankHead rank_;
  ConceptVae vae_;
  std::vector<Parameter*> registry_;
};

}  // namespace keyrank
