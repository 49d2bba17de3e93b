#pragma once

#include <chrono>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "keyrank/grad_check.hpp"
#include "keyrank/model.hpp"
#include "keyrank/trainer.hpp"

namespace keyrank {

struct GradSuiteResult {
  GradCheckReport report;
  double seconds = 0.0;

  bool pass(double tolerance) const { return report.max_rel_err <= tolerance; }
};

namespace gradsuite_detail {

inline Vec random_vec(std::size_t n, std::mt19937_64& rng, double lo = -1.5, double hi = 1.5) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vec v(n);
  for (double& x : v) x = u(rng);
  return v;
}

inline void randomize(Parameter& p, std::mt19937_64& rng, double lo = -1.5, double hi = 1.5) {
  std::uniform_real_distribution<double> u(lo, hi);
  for (double& x : p.value.a) x = u(rng);
}

inline void aggregate(GradCheckReport& into, const std::string& name,
                      const GradCheckReport& point_report) {
  GradCheckEntry e{name, point_report.max_rel_err, point_report.evals};
  into.add(e);
}

/// Central differences are only a valid oracle where the loss is smooth
/// within the step h. Rejects base points where any ReLU pre-activation or
/// hinge/triplet slack sits inside the finite-difference neighborhood.
inline bool fd_safe(const ForwardCache& fc, double threshold) {
  auto clear = [&](const Vec& v) {
    for (const double x : v) {
      if (std::abs(x) < threshold) return false;
    }
    return true;
  };
  if (!fc.frozen_h && !clear(fc.ctx_pre.a)) return false;
  if (!clear(fc.cand_pre.a)) return false;
  if (!clear(fc.doc_vae.mu_hpre) || !clear(fc.doc_vae.ls_hpre)) return false;
  for (const auto& pv : fc.phrase_vae) {
    if (!clear(pv.mu_hpre) || !clear(pv.ls_hpre)) return false;
  }
  for (const auto& [p, n] : fc.plan.pairs.pairs) {
    if (std::abs(fc.loss_params.delta1 - fc.rank_scores[p] + fc.rank_scores[n]) < threshold)
      return false;
    if (std::abs(fc.i3[n] - fc.i3[p] + fc.loss_params.delta2) < threshold) return false;
  }
  return true;
}

/// Collapses per-point entries into one row per op.
inline GradCheckReport collapse(const GradCheckReport& raw) {
  GradCheckReport out;
  std::vector<std::string> seen;
  for (const GradCheckEntry& e : raw.entries) {
    bool found = false;
    for (GradCheckEntry& o : out.entries) {
      if (o.name == e.name) {
        o.max_rel_err = std::max(o.max_rel_err, e.max_rel_err);
        o.evals += e.evals;
        found = true;
        break;
      }
    }
    if (!found) out.entries.push_back(e);
    out.max_rel_err = std::max(out.max_rel_err, e.max_rel_err);
    out.evals += e.evals;
  }
  return out;
}

}  // namespace gradsuite_detail

/// Central-difference checks for every differentiable operation and for the
/// fully composed joint loss on a two-document toy batch.
inline GradSuiteResult run_gradient_suite(double h = 1e-4, int points = 10,
                                          std::uint64_t seed = 0x5eedULL) {
  using gradsuite_detail::random_vec;
  using gradsuite_detail::randomize;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(seed);
  GradCheckReport raw;

  for (int pt = 0; pt < points; ++pt) {
    // dense: scalar projection r . (W x + b).
    {
      Parameter W("W", 3, 4), b("b", 3, 1), x("x", 4, 1);
      randomize(W, rng);
      randomize(b, rng);
      randomize(x, rng);
      const Vec r = random_vec(3, rng);
      auto loss = [&] {
        Vec y = dense(W.value, b.value.a, x.value.a);
        double s = 0.0;
        for (int i = 0; i < 3; ++i) s += r[i] * y[i];
        return s;
      };
      zero_grads({&W, &b, &x});
      dense_backward(W.value, x.value.a, r, W.grad, b.grad.a, x.grad.a);
      gradsuite_detail::aggregate(raw, "dense", check_all_params({&W, &b, &x}, loss, h));
    }

    // conv_window over a random span of a random H.
    {
      const int d = 4, m = 6, n = 2, start = 1;
      Parameter H("H", m, d);
      randomize(H, rng);
      ConvFilter filter("f", d, n);
      randomize(filter.w, rng);
      randomize(filter.b, rng);
      const Vec r = random_vec(d, rng);
      auto loss = [&] {
        Vec y = conv_window(H.value, filter, n, start);
        double s = 0.0;
        for (int i = 0; i < d; ++i) s += r[i] * y[i];
        return s;
      };
      zero_grads({&H, &filter.w, &filter.b});
      {
        Vec pre(d);
        affine(filter.w.value.a.data(), filter.b.value.a.data(), H.value.row(start), pre.data(),
               d, n * d);
        Vec gpre(d, 0.0);
        relu_backward(pre.data(), r.data(), gpre.data(), d);
        affine_backward(filter.w.value.a.data(), H.value.row(start), gpre.data(),
                        filter.w.grad.a.data(), filter.b.grad.a.data(), H.grad.row(start), d,
                        n * d);
      }
      gradsuite_detail::aggregate(raw, "conv_window",
                                  check_all_params({&H, &filter.w, &filter.b}, loss, h));
    }

    // softmax + cross-entropy w.r.t. the logits.
    {
      Parameter logits("logits", 5, 1);
      randomize(logits, rng);
      const int label = static_cast<int>(rng() % 5);
      auto loss = [&] { return cross_entropy(softmax(logits.value.a), label); };
      logits.zero_grad();
      softmax_ce_backward(softmax(logits.value.a), label, 1.0, logits.grad.a);
      gradsuite_detail::aggregate(raw, "softmax_cross_entropy",
                                  check_all_params({&logits}, loss, h));
    }

    // hinge and triplet: margins of order 1, scores of order 1.
    {
      Parameter s("scores", 2, 1);
      randomize(s, rng);
      auto loss = [&] { return hinge_pair_loss(s.value.a[0], s.value.a[1], 0.7); };
      s.zero_grad();
      hinge_pair_backward(s.value.a[0], s.value.a[1], 0.7, 1.0, s.grad.a[0], s.grad.a[1]);
      gradsuite_detail::aggregate(raw, "hinge_pair_loss", check_all_params({&s}, loss, h));
    }
    {
      Parameter s("scores", 2, 1);
      randomize(s, rng);
      auto loss = [&] { return triplet_loss(s.value.a[0], s.value.a[1], 0.7); };
      s.zero_grad();
      triplet_backward(s.value.a[0], s.value.a[1], 0.7, 1.0, s.grad.a[0], s.grad.a[1]);
      gradsuite_detail::aggregate(raw, "triplet_loss", check_all_params({&s}, loss, h));
    }

    // gaussian_kl over positive sigma.
    {
      Parameter mu("mu", 4, 1), sigma("sigma", 4, 1);
      randomize(mu, rng);
      randomize(sigma, rng, 0.5, 2.0);
      auto loss = [&] { return gaussian_kl(mu.value.a, sigma.value.a); };
      zero_grads({&mu, &sigma});
      gaussian_kl_backward(mu.value.a, sigma.value.a, 1.0, mu.grad.a, sigma.grad.a);
      gradsuite_detail::aggregate(raw, "gaussian_kl", check_all_params({&mu, &sigma}, loss, h));
    }

    // reparameterize with fixed noise.
    {
      Parameter mu("mu", 4, 1), sigma("sigma", 4, 1);
      randomize(mu, rng);
      randomize(sigma, rng, 0.5, 2.0);
      const Vec eps = random_vec(4, rng);
      const Vec r = random_vec(4, rng);
      auto loss = [&] {
        Vec z = reparameterize(mu.value.a, sigma.value.a, eps);
        double s = 0.0;
        for (int i = 0; i < 4; ++i) s += r[i] * z[i];
        return s;
      };
      zero_grads({&mu, &sigma});
      reparameterize_backward(eps, r, mu.grad.a, sigma.grad.a);
      gradsuite_detail::aggregate(raw, "reparameterize", check_all_params({&mu, &sigma}, loss, h));
    }

    // mse w.r.t. both arguments.
    {
      Parameter x("x", 5, 1), y("y", 5, 1);
      randomize(x, rng);
      randomize(y, rng);
      auto loss = [&] { return mse(x.value.a, y.value.a); };
      zero_grads({&x, &y});
      mse_backward(x.value.a, y.value.a, 1.0, x.grad.a, y.grad.a);
      gradsuite_detail::aggregate(raw, "mse", check_all_params({&x, &y}, loss, h));
    }

    // Two-layer nets, both activations.
    for (const Activation act : {Activation::Relu, Activation::Tanh}) {
      Mlp2 net("net", 4, 5, 3, act);
      Parameter x("x", 4, 1);
      for (Parameter* p : {&net.w1, &net.b1, &net.w2, &net.b2, &x}) randomize(*p, rng);
      const Vec r = random_vec(3, rng);
      auto loss = [&] {
        Vec out = net.forward(x.value.a);
        double s = 0.0;
        for (int i = 0; i < 3; ++i) s += r[i] * out[i];
        return s;
      };
      zero_grads({&net.w1, &net.b1, &net.w2, &net.b2, &x});
      {
        Vec hpre, hpost;
        net.forward(x.value.a, hpre, hpost);
        net.backward(x.value.a, hpre, hpost, r, x.grad.a);
      }
      gradsuite_detail::aggregate(
          raw, act == Activation::Relu ? "mlp2_relu" : "mlp2_tanh",
          check_all_params({&net.w1, &net.b1, &net.w2, &net.b2, &x}, loss, h));
    }

    // Embedding lookup: random projection of the gathered rows.
    {
      const int v = 6, d = 3;
      Parameter table("table", v, d);
      randomize(table, rng);
      const std::vector<int> ids{1, 4, 1};
      Mat r(static_cast<int>(ids.size()), d);
      for (double& x : r.a) x = random_vec(1, rng)[0];
      auto loss = [&] {
        Mat e;
        embed_forward(table, ids, e);
        double s = 0.0;
        for (std::size_t i = 0; i < e.a.size(); ++i) s += r.a[i] * e.a[i];
        return s;
      };
      table.zero_grad();
      embed_backward(table, ids, r);
      gradsuite_detail::aggregate(raw, "embed", check_all_params({&table}, loss, h));
    }

    // Residual window-3 convolution and the pooled document projection.
    {
      const int d = 4, m = 5;
      EncoderParams enc(/*vocab=*/3, d);
      Parameter E("E", m, d);
      randomize(E, rng, -1.0, 1.0);
      for (Parameter* p : {&enc.ctx_w, &enc.ctx_b, &enc.doc_w, &enc.doc_b})
        randomize(*p, rng, -0.8, 0.8);
      Mat rH(m, d);
      for (double& x : rH.a) x = random_vec(1, rng)[0];
      const Vec rdoc = random_vec(d, rng);
      auto loss = [&] {
        Mat ctx_pre, H;
        contextualize_forward(enc, E.value, ctx_pre, H);
        Vec pooled, pre, doc_vec;
        doc_repr_forward(enc, H, pooled, pre, doc_vec);
        double s = 0.0;
        for (std::size_t i = 0; i < H.a.size(); ++i) s += rH.a[i] * H.a[i];
        for (int i = 0; i < d; ++i) s += rdoc[i] * doc_vec[i];
        return s;
      };
      zero_grads({&E, &enc.ctx_w, &enc.ctx_b, &enc.doc_w, &enc.doc_b});
      {
        Mat ctx_pre, H;
        contextualize_forward(enc, E.value, ctx_pre, H);
        Vec pooled, pre, doc_vec;
        doc_repr_forward(enc, H, pooled, pre, doc_vec);
        Mat gH = rH;
        doc_repr_backward(enc, pooled, doc_vec, rdoc, m, gH);
        contextualize_backward(enc, E.value, ctx_pre, gH, E.grad);
      }
      gradsuite_detail::aggregate(
          raw, "contextualize_doc_repr",
          check_all_params({&E, &enc.ctx_w, &enc.ctx_b, &enc.doc_w, &enc.doc_b}, loss, h));
    }

    // Bilinear concept match.
    {
      const int c = 4;
      Parameter zp("z_phrase", c, 1), zd("z_doc", c, 1), w3("W3", c, c);
      randomize(zp, rng);
      randomize(zd, rng);
      randomize(w3, rng);
      auto loss = [&] { return concept_match(zp.value.a, zd.value.a, w3.value); };
      zero_grads({&zp, &zd, &w3});
      for (int r = 0; r < c; ++r) {
        for (int col = 0; col < c; ++col) {
          zp.grad.a[r] += w3.value(r, col) * zd.value.a[col];
          zd.grad.a[col] += w3.value(r, col) * zp.value.a[r];
          w3.grad(r, col) += zp.value.a[r] * zd.value.a[col];
        }
      }
      gradsuite_detail::aggregate(raw, "concept_match", check_all_params({&zp, &zd, &w3}, loss, h));
    }

    // Full VAE module loss (reconstruction + KL) through encode and decode.
    {
      const int d = 5, c = 3;
      ConceptVae vae(d, c);
      Parameter x("x", d, 1);
      randomize(x, rng, -1.0, 1.0);
      std::vector<Parameter*> ps{&x};
      for (Mlp2* net : {&vae.phr_mu, &vae.phr_logsig, &vae.phr_dec}) {
        for (Parameter* p : {&net->w1, &net->b1, &net->w2, &net->b2}) {
          randomize(*p, rng, -0.6, 0.6);
          ps.push_back(p);
        }
      }
      const Vec eps = random_vec(c, rng);
      auto loss = [&] {
        const auto cache = model_detail::vae_forward(vae, LatentKind::Phrase, x.value.a, eps);
        return cache.loss();
      };
      zero_grads(ps);
      {
        const auto cache = model_detail::vae_forward(vae, LatentKind::Phrase, x.value.a, eps);
        model_detail::vae_backward(vae, LatentKind::Phrase, cache, 1.0, {}, x.grad.a);
      }
      gradsuite_detail::aggregate(raw, "vae_module_loss", check_all_params(ps, loss, h));
    }
  }

  // Fully composed joint objective on a two-document toy batch: every model
  // parameter participates. Points with a kink inside the step neighborhood
  // are redrawn (the loss is not differentiable there).
  const double kink_threshold = 20.0 * h;
  for (int pt = 0; pt < points; ++pt) {
    std::vector<std::string> toks;
    for (int i = 0; i < 16; ++i) toks.push_back(cat("t", i));
    for (int attempt = 0;; ++attempt) {
      if (attempt > 200) throw Error("gradient suite: no smooth evaluation point found");
      std::vector<LabeledDocument> docs(2);
      std::uniform_int_distribution<int> tok_pick(0, 15);
      const int lens[2] = {7, 9};
      for (int di = 0; di < 2; ++di) {
        docs[di].doc.id = cat("toy", di);
        for (int i = 0; i < lens[di]; ++i)
          docs[di].doc.tokens.push_back(toks[tok_pick(rng)]);
        docs[di].gold = {join_tokens(docs[di].doc.tokens, 1, 2)};
        docs[di].positive_spans = align_labels(docs[di].doc, docs[di].gold, 3);
      }
      std::vector<LabeledDocument> vocab_docs = docs;
      Vocabulary vocab = build_vocab(vocab_docs, 1);
      ModelDims dims{vocab.size(), 8, 4, 3};
      Model model(dims, vocab, /*seed=*/seed + 997 * pt + attempt);

      const LossParams lp;
      std::vector<TrainPlan> plans;
      bool safe = true;
      for (const auto& ld : docs) {
        const auto spans = enumerate_spans(static_cast<int>(ld.doc.tokens.size()), 3);
        plans.push_back(make_plan(spans, ld.positive_spans, 4, dims.concept_dim, rng));
      }
      for (std::size_t i = 0; i < docs.size(); ++i) {
        const ForwardCache fc = model.forward_train(docs[i], plans[i], lp);
        safe = safe && gradsuite_detail::fd_safe(fc, kink_threshold);
      }
      if (!safe) continue;

      auto loss = [&] {
        double total = 0.0;
        for (std::size_t i = 0; i < docs.size(); ++i)
          total += model.forward_train(docs[i], plans[i], lp).losses.total;
        return total / static_cast<double>(docs.size());
      };
      zero_grads(model.parameters());
      const LossWeights weights = LossWeights::from(lp, static_cast<int>(docs.size()));
      for (std::size_t i = 0; i < docs.size(); ++i) {
        ForwardCache fc = model.forward_train(docs[i], plans[i], lp);
        model.backward(fc, weights);
      }
      GradCheckReport pipeline = check_all_params(model.parameters(), loss, h);
      GradCheckEntry e{"joint_pipeline", pipeline.max_rel_err, pipeline.evals};
      raw.add(e);
      break;
    }
  }

  GradSuiteResult result;
  result.report = gradsuite_detail::collapse(raw);
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace keyrank
