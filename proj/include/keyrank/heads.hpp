#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "keyrank/ops.hpp"
#include "keyrank/param.hpp"

namespace keyrank {

/// Binary keyphrase/not classifier over a candidate representation.
struct ChunkHead {
  Parameter w;  // 2 x d
  Parameter b;  // 2

  explicit ChunkHead(int d) : w("chunk.W", 2, d), b("chunk.b", 2, 1) {}
};

/// Scalar saliency scorer.
struct RankHead {
  Parameter w;  // 1 x d
  Parameter b;  // 1

  explicit RankHead(int d) : w("rank.W", 1, d), b("rank.b", 1, 1) {}
};

/// softmax(W repr + b); entry 1 is the keyphrase probability.
inline Vec chunk_score(const ChunkHead& head, const Vec& repr) {
  return softmax(dense(head.w.value, head.b.value.a, repr));
}

/// Mean cross-entropy over all candidates of a document.
inline double chunk_loss(const Mat& probs, const std::vector<int>& labels) {
  if (probs.rows == 0) throw DimensionError("chunk_loss: no candidates");
  if (probs.rows != static_cast<int>(labels.size()))
    throw DimensionError("chunk_loss: probs/labels size mismatch");
  double total = 0.0;
  for (int k = 0; k < probs.rows; ++k) {
    Vec p(probs.row(k), probs.row(k) + probs.cols);
    total += cross_entropy(p, labels[k]);
  }
  return total / probs.rows;
}

inline double saliency_score(const RankHead& head, const Vec& repr) {
  return dense(head.w.value, head.b.value.a, repr)[0];
}

/// Per-document positive/negative candidate split plus the sampled training
/// pairs; indices refer to the document's enumerated candidate list.
struct PairSet {
  std::vector<int> positives;
  std::vector<int> negatives;
  std::vector<std::pair<int, int>> pairs;  // (positive, negative)
};

/// Mean hinge loss over the sampled pairs; 0 when the pair list is empty
/// (caller logs the skip).
inline double rank_loss(const PairSet& pairs, const Vec& scores, double margin) {
  if (pairs.pairs.empty()) return 0.0;
  double total = 0.0;
  for (const auto& [p, n] : pairs.pairs) total += hinge_pair_loss(scores[p], scores[n], margin);
  return total / static_cast<double>(pairs.pairs.size());
}

// ---------------------------------------------------------------------------
// Concept matching (VAE + bilinear agreement).
// ---------------------------------------------------------------------------

enum class Activation { Relu, Tanh };

/// Two-layer perceptron; the activation applies to the hidden layer only.
struct Mlp2 {
  Parameter w1, b1, w2, b2;
  Activation act;

  Mlp2(const std::string& prefix, int in, int hidden, int out, Activation a)
      : w1(prefix + ".W1", hidden, in),
        b1(prefix + ".b1", hidden, 1),
        w2(prefix + ".W2", out, hidden),
        b2(prefix + ".b2", out, 1),
        act(a) {}

  int in_dim() const { return w1.cols(); }
  int hidden_dim() const { return w1.rows(); }
  int out_dim() const { return w2.rows(); }

  Vec forward(const Vec& x, Vec& h_pre, Vec& h) const {
    h_pre = dense(w1.value, b1.value.a, x);
    h = h_pre;
    if (act == Activation::Relu) {
      relu(h.data(), h.data(), static_cast<int>(h.size()));
    } else {
      tanh_inplace(h.data(), static_cast<int>(h.size()));
    }
    return dense(w2.value, b2.value.a, h);
  }

  Vec forward(const Vec& x) const {
    Vec h_pre, h;
    return forward(x, h_pre, h);
  }

  /// Accumulates parameter grads and the input grad.
  void backward(const Vec& x, const Vec& h_pre, const Vec& h, const Vec& gout, Vec& gx) {
    Vec gh(h.size(), 0.0);
    affine_backward(w2.value.a.data(), h.data(), gout.data(), w2.grad.a.data(), b2.grad.a.data(),
                    gh.data(), w2.rows(), w2.cols());
    Vec gh_pre(h.size(), 0.0);
    if (act == Activation::Relu) {
      relu_backward(h_pre.data(), gh.data(), gh_pre.data(), static_cast<int>(h.size()));
    } else {
      tanh_backward(h.data(), gh.data(), gh_pre.data(), static_cast<int>(h.size()));
    }
    affine_backward(w1.value.a.data(), x.data(), gh_pre.data(), w1.grad.a.data(), b1.grad.a.data(),
                    gx.data(), w1.rows(), w1.cols());
  }
};

struct ConceptLatent {
  Vec mu;
  Vec sigma;
  Vec z;
};

enum class LatentKind { Document, Phrase };

/// Gaussian concept model: separate mu/log-sigma encoders and decoders for
/// documents and phrases, plus the bilinear match matrix.
struct ConceptVae {
  Mlp2 doc_mu, doc_logsig, phr_mu, phr_logsig;  // ReLU hidden, d -> c
  Mlp2 doc_dec, phr_dec;                        // tanh hidden, c -> d
  Parameter match_w;                            // c x c

  ConceptVae(int d, int c)
      : doc_mu("vae.doc_mu", d, d, c, Activation::Relu),
        doc_logsig("vae.doc_logsig", d, d, c, Activation::Relu),
        phr_mu("vae.phrase_mu", d, d, c, Activation::Relu),
        phr_logsig("vae.phrase_logsig", d, d, c, Activation::Relu),
        doc_dec("vae.doc_dec", c, d, d, Activation::Tanh),
        phr_dec("vae.phrase_dec", c, d, d, Activation::Tanh),
        match_w("vae.match.W", c, c) {}

  const Mlp2& mu_net(LatentKind k) const { return k == LatentKind::Document ? doc_mu : phr_mu; }
  const Mlp2& logsig_net(LatentKind k) const {
    return k == LatentKind::Document ? doc_logsig : phr_logsig;
  }
  const Mlp2& decoder(LatentKind k) const { return k == LatentKind::Document ? doc_dec : phr_dec; }
  Mlp2& mu_net(LatentKind k) { return k == LatentKind::Document ? doc_mu : phr_mu; }
  Mlp2& logsig_net(LatentKind k) { return k == LatentKind::Document ? doc_logsig : phr_logsig; }
  Mlp2& decoder(LatentKind k) { return k == LatentKind::Document ? doc_dec : phr_dec; }
};

/// mu and sigma from the respective nets (sigma via exp, so strictly
/// positive); z by reparameterization with caller-supplied noise.
inline ConceptLatent concept_encode(const ConceptVae& vae, const Vec& x, LatentKind kind,
                                    const Vec& eps) {
  ConceptLatent out;
  out.mu = vae.mu_net(kind).forward(x);
  Vec logsig = vae.logsig_net(kind).forward(x);
  out.sigma.resize(logsig.size());
  for (std::size_t j = 0; j < logsig.size(); ++j) out.sigma[j] = std::exp(logsig[j]);
  out.z = reparameterize(out.mu, out.sigma, eps);
  return out;
}

/// Bilinear concept agreement z_phrase^T W z_doc.
inline double concept_match(const Vec& z_phrase, const Vec& z_doc, const Mat& w3) {
  if (w3.rows != static_cast<int>(z_phrase.size()) || w3.cols != static_cast<int>(z_doc.size()))
    throw DimensionError("concept_match: dimension mismatch");
  double s = 0.0;
  for (int r = 0; r < w3.rows; ++r) {
    const double* wr = w3.row(r);
    double acc = 0.0;
    for (int c = 0; c < w3.cols; ++c) acc += wr[c] * z_doc[c];
    s += z_phrase[r] * acc;
  }
  return s;
}

/// Mean triplet loss over the sampled pairs, on per-candidate match scores
/// against the document.
inline double match_triplet_loss(const PairSet& pairs, const std::vector<double>& i3,
                                 double margin) {
  if (pairs.pairs.empty()) return 0.0;
  double total = 0.0;
  for (const auto& [p, n] : pairs.pairs) total += triplet_loss(i3[p], i3[n], margin);
  return total / static_cast<double>(pairs.pairs.size());
}

/// Reconstruction MSE plus KL to the standard Gaussian prior.
inline double vae_module_loss(const Vec& x, const ConceptLatent& latent, const Vec& recon) {
  return mse(x, recon) + gaussian_kl(latent.mu, latent.sigma);
}

/// L_t = L_m + lambda L_d + (1 - lambda) L_k.
inline double matching_total(double l_m, double l_d, double l_k, double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0))
    throw ConfigError(cat("matching_total: lambda must be in (0,1), got ", lambda));
  return l_m + lambda * l_d + (1.0 - lambda) * l_k;
}

/// L = e1 L_c + e2 L_r + e3 L_t with e1 + e2 + e3 = 1; zero weights are
/// allowed for ablations.
inline double joint_loss(double l_c, double l_r, double l_t, double e1, double e2, double e3) {
  if (e1 < 0.0 || e2 < 0.0 || e3 < 0.0)
    throw ConfigError("joint_loss: loss weights must be non-negative");
  if (std::abs(e1 + e2 + e3 - 1.0) > 1e-9)
    throw ConfigError(cat("joint_loss: weights must sum to 1, got ", e1 + e2 + e3));
  return e1 * l_c + e2 * l_r + e3 * l_t;
}

}  // namespace keyrank
