#include "groklab/model.hpp"

#include <algorithm>
#include <cmath>

#include "groklab/linalg.hpp"
#include "groklab/rng.hpp"
#include "groklab/scalar.hpp"

namespace groklab {

namespace {

constexpr double kLnEps = 1e-5;  // layer-norm variance epsilon

template <class S>
S gelu(const S& x) {
  const S inv_sqrt2 = 0.70710678118654752440;
  return S(0.5) * x * (S(1.0) + erf(x * inv_sqrt2));
}

template <class S>
S gelu_grad(const S& x) {
  const S inv_sqrt2 = 0.70710678118654752440;
  const S inv_sqrt2pi = 0.39894228040143267794;
  return S(0.5) * (S(1.0) + erf(x * inv_sqrt2)) + x * inv_sqrt2pi * exp(S(-0.5) * x * x);
}

template <class S>
void add_bias_rows(std::vector<S>& m, const S* bias, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    S* row = m.data() + static_cast<std::size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) row[c] += bias[c];
  }
}

template <class S>
void col_sums_into(const std::vector<S>& m, S* out, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    const S* row = m.data() + static_cast<std::size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) out[c] += row[c];
  }
}

// y = g * (x - mu) * rstd + b, per row; mu/rstd cached for the backward pass
template <class S>
void layer_norm_fwd(const S* x, const S* gain, const S* bias, S* y, S* mu, S* rstd,
                    int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    const S* xr = x + static_cast<std::size_t>(r) * cols;
    S* yr = y + static_cast<std::size_t>(r) * cols;
    S m(0.0);
    for (int c = 0; c < cols; ++c) m += xr[c];
    m = m / S(static_cast<double>(cols));
    S var(0.0);
    for (int c = 0; c < cols; ++c) {
      const S dxc = xr[c] - m;
      var += dxc * dxc;
    }
    var = var / S(static_cast<double>(cols));
    const S rs = S(1.0) / sqrt(var + S(kLnEps));
    mu[r] = m;
    rstd[r] = rs;
    for (int c = 0; c < cols; ++c) yr[c] = gain[c] * ((xr[c] - m) * rs) + bias[c];
  }
}

template <class S>
void layer_norm_bwd(const S* x, const S* gain, const S* mu, const S* rstd, const S* dy,
                    S* dx_accum, S* dgain, S* dbias, int rows, int cols) {
  std::vector<S> dxhat(static_cast<std::size_t>(cols));
  for (int r = 0; r < rows; ++r) {
    const S* xr = x + static_cast<std::size_t>(r) * cols;
    const S* dyr = dy + static_cast<std::size_t>(r) * cols;
    S* dxr = dx_accum + static_cast<std::size_t>(r) * cols;
    const S m = mu[r];
    const S rs = rstd[r];
    S s1(0.0), s2(0.0);
    for (int c = 0; c < cols; ++c) {
      const S xhat = (xr[c] - m) * rs;
      dgain[c] += dyr[c] * xhat;
      dbias[c] += dyr[c];
      dxhat[static_cast<std::size_t>(c)] = dyr[c] * gain[c];
      s1 += dxhat[static_cast<std::size_t>(c)];
      s2 += dxhat[static_cast<std::size_t>(c)] * xhat;
    }
    const S inv_n = S(1.0 / static_cast<double>(cols));
    s1 = s1 * inv_n;
    s2 = s2 * inv_n;
    for (int c = 0; c < cols; ++c) {
      const S xhat = (xr[c] - m) * rs;
      dxr[c] += rs * (dxhat[static_cast<std::size_t>(c)] - s1 - xhat * s2);
    }
  }
}

// mean cross-entropy over the answer classes; fills dlogits (already divided
// by the batch size) when requested
template <class S>
LossReport softmax_xent(const std::vector<S>& logits, const std::vector<std::int32_t>& labels,
                        int n, int q, std::vector<S>* dlogits,
                        std::vector<double>* logits_out) {
  S total(0.0);
  int hits = 0;
  if (dlogits) dlogits->assign(static_cast<std::size_t>(n) * q, S(0.0));
  if (logits_out) logits_out->resize(static_cast<std::size_t>(n) * q);
  for (int i = 0; i < n; ++i) {
    const S* z = logits.data() + static_cast<std::size_t>(i) * q;
    int arg = 0;
    S zmax = z[0];
    for (int c = 1; c < q; ++c)
      if (z[c] > zmax) {
        zmax = z[c];
        arg = c;
      }
    S sum(0.0);
    for (int c = 0; c < q; ++c) sum += exp(z[c] - zmax);
    const S lse = zmax + log(sum);
    const int label = labels[static_cast<std::size_t>(i)];
    total += lse - z[label];
    if (arg == label) ++hits;
    if (dlogits) {
      S* dz = dlogits->data() + static_cast<std::size_t>(i) * q;
      const S inv_n = S(1.0 / static_cast<double>(n));
      for (int c = 0; c < q; ++c) dz[c] = exp(z[c] - lse) * inv_n;
      dz[label] -= inv_n;
    }
    if (logits_out)
      for (int c = 0; c < q; ++c)
        (*logits_out)[static_cast<std::size_t>(i) * q + c] = value_of(z[c]);
  }
  LossReport rep;
  rep.loss = value_of(total) / n;
  rep.accuracy = static_cast<double>(hits) / n;
  return rep;
}

template <class S>
LossReport loss_from(const S& total, int n, int hits);

// ---------------------------------------------------------------------------
// scratch buffers, kept alive between calls on the same thread

template <class S>
struct LayerCache {
  std::vector<S> x_in, a1, q, k, v, p, actx, x_mid, a2, h1, g;
  std::vector<S> mu1, rstd1, mu2, rstd2;
};

template <class S>
struct Workspace {
  std::vector<S> params;  // Dual path materializes seeded parameters here
  std::vector<S> x0, dx, hfin, mu_f, rstd_f, logits, dlogits;
  std::vector<S> dq, dk, dv, dactx, dh1, dg, da1, da2, dhfin, dx_last;
  std::vector<LayerCache<S>> layers;
  std::vector<S> grad;
};

template <class S>
Workspace<S>& workspace() {
  thread_local Workspace<S> ws;
  return ws;
}

struct BlockView {
  const ParamBlock* b;
  std::size_t off() const { return b->offset; }
};

// ---------------------------------------------------------------------------

template <class S>
LossReport run_mlp(const ModelConfig& cfg, const ParamLayout& layout, const S* theta,
                   const Batch& batch, S* grad, ActivationRecord* rec,
                   std::vector<double>* logits_out) {
  const int n = batch.n;
  const int d = cfg.width;
  const int h = 2 * cfg.width;
  const int q = cfg.answer_classes;
  const int two_d = 2 * d;

  const std::size_t o_emb = layout.block("tok_embed").offset;
  const std::size_t o_w1 = layout.block("mlp.w1").offset;
  const std::size_t o_b1 = layout.block("mlp.b1").offset;
  const std::size_t o_w2 = layout.block("mlp.w2").offset;
  const std::size_t o_b2 = layout.block("mlp.b2").offset;

  auto& ws = workspace<S>();
  std::vector<S>& z = ws.x0;
  z.assign(static_cast<std::size_t>(n) * two_d, S(0.0));
  for (int i = 0; i < n; ++i) {
    const std::int32_t ta = batch.tokens[static_cast<std::size_t>(i) * 4 + 0];
    const std::int32_t tb = batch.tokens[static_cast<std::size_t>(i) * 4 + 2];
    const S* ea = theta + o_emb + static_cast<std::size_t>(ta) * d;
    const S* eb = theta + o_emb + static_cast<std::size_t>(tb) * d;
    S* zi = z.data() + static_cast<std::size_t>(i) * two_d;
    for (int c = 0; c < d; ++c) zi[c] = ea[c];
    for (int c = 0; c < d; ++c) zi[d + c] = eb[c];
  }

  std::vector<S>& h1 = ws.hfin;
  h1.assign(static_cast<std::size_t>(n) * h, S(0.0));
  la::gemm(false, true, n, h, two_d, 1.0, z.data(), theta + o_w1, 0.0, h1.data());
  add_bias_rows(h1, theta + o_b1, n, h);

  std::vector<S>& relu = ws.dx;
  relu.resize(h1.size());
  for (std::size_t i = 0; i < h1.size(); ++i)
    relu[i] = value_of(h1[i]) > 0.0 ? h1[i] : S(0.0);

  std::vector<S>& hout = ws.da2;
  hout.assign(static_cast<std::size_t>(n) * d, S(0.0));
  la::gemm(false, true, n, d, h, 1.0, relu.data(), theta + o_w2, 0.0, hout.data());
  add_bias_rows(hout, theta + o_b2, n, d);

  std::vector<S>& logits = ws.logits;
  logits.assign(static_cast<std::size_t>(n) * q, S(0.0));
  la::gemm(false, true, n, q, d, 1.0, hout.data(), theta + o_emb, 0.0, logits.data());

  if (rec) {
    rec->layers = {"embed_concat", "hidden", "readout"};
    rec->dims = {two_d, h, d};
    rec->values.assign(3, {});
    auto dump = [&](int which, const std::vector<S>& m, int cols) {
      rec->values[static_cast<std::size_t>(which)].resize(static_cast<std::size_t>(n) * cols);
      for (std::size_t i = 0; i < static_cast<std::size_t>(n) * cols; ++i)
        rec->values[static_cast<std::size_t>(which)][i] = value_of(m[i]);
    };
    dump(0, z, two_d);
    dump(1, relu, h);
    dump(2, hout, d);
  }

  LossReport rep = softmax_xent(logits, batch.labels, n, q, grad ? &ws.dlogits : nullptr,
                                logits_out);
  if (!grad) return rep;

  std::vector<S>& dlogits = ws.dlogits;
  std::vector<S>& dhout = ws.dq;
  dhout.assign(static_cast<std::size_t>(n) * d, S(0.0));
  la::gemm(false, false, n, d, q, 1.0, dlogits.data(), theta + o_emb, 0.0, dhout.data());
  la::gemm(true, false, q, d, n, 1.0, dlogits.data(), hout.data(), 1.0, grad + o_emb);

  col_sums_into(dhout, grad + o_b2, n, d);
  la::gemm(true, false, d, h, n, 1.0, dhout.data(), relu.data(), 1.0, grad + o_w2);

  std::vector<S>& dh1 = ws.dk;
  dh1.assign(static_cast<std::size_t>(n) * h, S(0.0));
  la::gemm(false, false, n, h, d, 1.0, dhout.data(), theta + o_w2, 0.0, dh1.data());
  for (std::size_t i = 0; i < dh1.size(); ++i)
    if (value_of(h1[i]) <= 0.0) dh1[i] = S(0.0);

  col_sums_into(dh1, grad + o_b1, n, h);
  la::gemm(true, false, h, two_d, n, 1.0, dh1.data(), z.data(), 1.0, grad + o_w1);

  std::vector<S>& dz = ws.dv;
  dz.assign(static_cast<std::size_t>(n) * two_d, S(0.0));
  la::gemm(false, false, n, two_d, h, 1.0, dh1.data(), theta + o_w1, 0.0, dz.data());
  for (int i = 0; i < n; ++i) {
    const std::int32_t ta = batch.tokens[static_cast<std::size_t>(i) * 4 + 0];
    const std::int32_t tb = batch.tokens[static_cast<std::size_t>(i) * 4 + 2];
    const S* dzi = dz.data() + static_cast<std::size_t>(i) * two_d;
    S* ga = grad + o_emb + static_cast<std::size_t>(ta) * d;
    S* gb = grad + o_emb + static_cast<std::size_t>(tb) * d;
    for (int c = 0; c < d; ++c) ga[c] += dzi[c];
    for (int c = 0; c < d; ++c) gb[c] += dzi[d + c];
  }
  return rep;
}

template <class S>
LossReport run_transformer(const ModelConfig& cfg, const ParamLayout& layout, const S* theta,
                           const Batch& batch, S* grad, ActivationRecord* rec,
                           std::vector<double>* logits_out) {
  const int n = batch.n;
  const int T = cfg.context_len;
  const int d = cfg.width;
  const int nh = cfg.heads;
  const int hd = d / nh;
  const int f = 4 * d;
  const int q = cfg.answer_classes;
  const int N = n * T;
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));

  const std::size_t o_emb = layout.block("tok_embed").offset;
  const std::size_t o_pos = layout.block("pos_embed").offset;
  const std::size_t o_fg = layout.block("final.gain").offset;
  const std::size_t o_fb = layout.block("final.bias").offset;

  auto& ws = workspace<S>();
  if (static_cast<int>(ws.layers.size()) < cfg.depth) ws.layers.resize(cfg.depth);

  const int act_pos = rec ? (rec->position < 0 ? T - 1 : rec->position) : T - 1;
  if (rec) {
    if (act_pos < 0 || act_pos >= T) throw RuntimeFault("activation position out of range");
    rec->layers.clear();
    rec->dims.clear();
    rec->values.clear();
  }
  auto capture = [&](const std::string& name, const S* rows, int stride_rows, int cols) {
    if (!rec) return;
    rec->layers.push_back(name);
    rec->dims.push_back(cols);
    std::vector<double> out(static_cast<std::size_t>(n) * cols);
    for (int i = 0; i < n; ++i) {
      const S* r = rows + static_cast<std::size_t>(i * stride_rows + act_pos) * cols;
      for (int c = 0; c < cols; ++c) out[static_cast<std::size_t>(i) * cols + c] = value_of(r[c]);
    }
    rec->values.push_back(std::move(out));
  };

  // embeddings
  std::vector<S>& x0 = ws.x0;
  x0.assign(static_cast<std::size_t>(N) * d, S(0.0));
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < T; ++t) {
      const std::int32_t tok = batch.tokens[static_cast<std::size_t>(i) * T + t];
      const S* e = theta + o_emb + static_cast<std::size_t>(tok) * d;
      const S* pe = theta + o_pos + static_cast<std::size_t>(t) * d;
      S* row = x0.data() + (static_cast<std::size_t>(i) * T + t) * d;
      for (int c = 0; c < d; ++c) row[c] = e[c] + pe[c];
    }
  capture("embed", x0.data(), T, d);

  const std::vector<S>* x_prev = &x0;
  for (int l = 0; l < cfg.depth; ++l) {
    auto& L = ws.layers[static_cast<std::size_t>(l)];
    const std::string pre = "block" + std::to_string(l) + ".";
    const std::size_t o_g1 = layout.block(pre + "ln1.gain").offset;
    const std::size_t o_bb1 = layout.block(pre + "ln1.bias").offset;
    const std::size_t o_wq = layout.block(pre + "attn.wq").offset;
    const std::size_t o_bq = layout.block(pre + "attn.bq").offset;
    const std::size_t o_wk = layout.block(pre + "attn.wk").offset;
    const std::size_t o_bk = layout.block(pre + "attn.bk").offset;
    const std::size_t o_wv = layout.block(pre + "attn.wv").offset;
    const std::size_t o_bv = layout.block(pre + "attn.bv").offset;
    const std::size_t o_wo = layout.block(pre + "attn.wo").offset;
    const std::size_t o_bo = layout.block(pre + "attn.bo").offset;
    const std::size_t o_g2 = layout.block(pre + "ln2.gain").offset;
    const std::size_t o_bb2 = layout.block(pre + "ln2.bias").offset;
    const std::size_t o_w1 = layout.block(pre + "ff.w1").offset;
    const std::size_t o_fb1 = layout.block(pre + "ff.b1").offset;
    const std::size_t o_w2 = layout.block(pre + "ff.w2").offset;
    const std::size_t o_fb2 = layout.block(pre + "ff.b2").offset;

    L.x_in = *x_prev;
    L.a1.assign(static_cast<std::size_t>(N) * d, S(0.0));
    L.mu1.assign(static_cast<std::size_t>(N), S(0.0));
    L.rstd1.assign(static_cast<std::size_t>(N), S(0.0));
    layer_norm_fwd(L.x_in.data(), theta + o_g1, theta + o_bb1, L.a1.data(), L.mu1.data(),
                   L.rstd1.data(), N, d);

    L.q.assign(static_cast<std::size_t>(N) * d, S(0.0));
    L.k.assign(static_cast<std::size_t>(N) * d, S(0.0));
    L.v.assign(static_cast<std::size_t>(N) * d, S(0.0));
    la::gemm(false, true, N, d, d, 1.0, L.a1.data(), theta + o_wq, 0.0, L.q.data());
    la::gemm(false, true, N, d, d, 1.0, L.a1.data(), theta + o_wk, 0.0, L.k.data());
    la::gemm(false, true, N, d, d, 1.0, L.a1.data(), theta + o_wv, 0.0, L.v.data());
    add_bias_rows(L.q, theta + o_bq, N, d);
    add_bias_rows(L.k, theta + o_bk, N, d);
    add_bias_rows(L.v, theta + o_bv, N, d);

    // causal softmax attention, per sample and head
    L.p.assign(static_cast<std::size_t>(n) * nh * T * T, S(0.0));
    L.actx.assign(static_cast<std::size_t>(N) * d, S(0.0));
    for (int i = 0; i < n; ++i)
      for (int hh = 0; hh < nh; ++hh) {
        S* p = L.p.data() + ((static_cast<std::size_t>(i) * nh + hh) * T) * T;
        for (int t = 0; t < T; ++t) {
          const S* qrow = L.q.data() + (static_cast<std::size_t>(i) * T + t) * d + hh * hd;
          S smax(-1e300);
          for (int u = 0; u <= t; ++u) {
            const S* krow = L.k.data() + (static_cast<std::size_t>(i) * T + u) * d + hh * hd;
            S s(0.0);
            for (int c = 0; c < hd; ++c) s += qrow[c] * krow[c];
            s = s * S(scale);
            p[t * T + u] = s;
            if (s > smax) smax = s;
          }
          S sum(0.0);
          for (int u = 0; u <= t; ++u) {
            p[t * T + u] = exp(p[t * T + u] - smax);
            sum += p[t * T + u];
          }
          const S inv = S(1.0) / sum;
          S* arow = L.actx.data() + (static_cast<std::size_t>(i) * T + t) * d + hh * hd;
          for (int u = 0; u <= t; ++u) {
            p[t * T + u] = p[t * T + u] * inv;
            const S* vrow = L.v.data() + (static_cast<std::size_t>(i) * T + u) * d + hh * hd;
            const S w = p[t * T + u];
            for (int c = 0; c < hd; ++c) arow[c] += w * vrow[c];
          }
        }
      }

    // attention output projection + residual
    L.x_mid.assign(static_cast<std::size_t>(N) * d, S(0.0));
    la::gemm(false, true, N, d, d, 1.0, L.actx.data(), theta + o_wo, 0.0, L.x_mid.data());
    add_bias_rows(L.x_mid, theta + o_bo, N, d);
    for (std::size_t idx = 0; idx < L.x_mid.size(); ++idx) L.x_mid[idx] += L.x_in[idx];

    // feed-forward + residual
    L.a2.assign(static_cast<std::size_t>(N) * d, S(0.0));
    L.mu2.assign(static_cast<std::size_t>(N), S(0.0));
    L.rstd2.assign(static_cast<std::size_t>(N), S(0.0));
    layer_norm_fwd(L.x_mid.data(), theta + o_g2, theta + o_bb2, L.a2.data(), L.mu2.data(),
                   L.rstd2.data(), N, d);
    L.h1.assign(static_cast<std::size_t>(N) * f, S(0.0));
    la::gemm(false, true, N, f, d, 1.0, L.a2.data(), theta + o_w1, 0.0, L.h1.data());
    add_bias_rows(L.h1, theta + o_fb1, N, f);
    L.g.resize(L.h1.size());
    for (std::size_t idx = 0; idx < L.h1.size(); ++idx) L.g[idx] = gelu(L.h1[idx]);

    std::vector<S>& x_out = (l + 1 < cfg.depth) ? ws.layers[static_cast<std::size_t>(l + 1)].x_in
                                                : ws.dx_last;
    x_out.assign(static_cast<std::size_t>(N) * d, S(0.0));
    la::gemm(false, true, N, d, f, 1.0, L.g.data(), theta + o_w2, 0.0, x_out.data());
    add_bias_rows(x_out, theta + o_fb2, N, d);
    for (std::size_t idx = 0; idx < x_out.size(); ++idx) x_out[idx] += L.x_mid[idx];
    capture("block" + std::to_string(l), x_out.data(), T, d);
    x_prev = &x_out;
  }

  // final norm on the readout position only
  const std::vector<S>& x_top = *x_prev;
  std::vector<S>& xlast = ws.da1;
  xlast.assign(static_cast<std::size_t>(n) * d, S(0.0));
  for (int i = 0; i < n; ++i) {
    const S* src = x_top.data() + (static_cast<std::size_t>(i) * T + (T - 1)) * d;
    std::copy(src, src + d, xlast.data() + static_cast<std::size_t>(i) * d);
  }
  std::vector<S>& hfin = ws.hfin;
  hfin.assign(static_cast<std::size_t>(n) * d, S(0.0));
  ws.mu_f.assign(static_cast<std::size_t>(n), S(0.0));
  ws.rstd_f.assign(static_cast<std::size_t>(n), S(0.0));
  layer_norm_fwd(xlast.data(), theta + o_fg, theta + o_fb, hfin.data(), ws.mu_f.data(),
                 ws.rstd_f.data(), n, d);
  if (rec && act_pos == T - 1) capture("final_norm", hfin.data(), 1, d);

  std::vector<S>& logits = ws.logits;
  logits.assign(static_cast<std::size_t>(n) * q, S(0.0));
  la::gemm(false, true, n, q, d, 1.0, hfin.data(), theta + o_emb, 0.0, logits.data());

  LossReport rep = softmax_xent(logits, batch.labels, n, q, grad ? &ws.dlogits : nullptr,
                                logits_out);
  if (!grad) return rep;

  // ---- backward ----
  std::vector<S>& dhfin = ws.dhfin;
  dhfin.assign(static_cast<std::size_t>(n) * d, S(0.0));
  la::gemm(false, false, n, d, q, 1.0, ws.dlogits.data(), theta + o_emb, 0.0, dhfin.data());
  la::gemm(true, false, q, d, n, 1.0, ws.dlogits.data(), hfin.data(), 1.0, grad + o_emb);

  std::vector<S>& dxlast = ws.dg;
  dxlast.assign(static_cast<std::size_t>(n) * d, S(0.0));
  layer_norm_bwd(xlast.data(), theta + o_fg, ws.mu_f.data(), ws.rstd_f.data(), dhfin.data(),
                 dxlast.data(), grad + o_fg, grad + o_fb, n, d);

  std::vector<S>& dx = ws.dx;
  dx.assign(static_cast<std::size_t>(N) * d, S(0.0));
  for (int i = 0; i < n; ++i) {
    S* dst = dx.data() + (static_cast<std::size_t>(i) * T + (T - 1)) * d;
    const S* src = dxlast.data() + static_cast<std::size_t>(i) * d;
    for (int c = 0; c < d; ++c) dst[c] += src[c];
  }

  for (int l = cfg.depth - 1; l >= 0; --l) {
    auto& L = ws.layers[static_cast<std::size_t>(l)];
    const std::string pre = "block" + std::to_string(l) + ".";
    const std::size_t o_g1 = layout.block(pre + "ln1.gain").offset;
    const std::size_t o_bb1 = layout.block(pre + "ln1.bias").offset;
    const std::size_t o_wq = layout.block(pre + "attn.wq").offset;
    const std::size_t o_bq = layout.block(pre + "attn.bq").offset;
    const std::size_t o_wk = layout.block(pre + "attn.wk").offset;
    const std::size_t o_bk = layout.block(pre + "attn.bk").offset;
    const std::size_t o_wv = layout.block(pre + "attn.wv").offset;
    const std::size_t o_bv = layout.block(pre + "attn.bv").offset;
    const std::size_t o_wo = layout.block(pre + "attn.wo").offset;
    const std::size_t o_bo = layout.block(pre + "attn.bo").offset;
    const std::size_t o_g2 = layout.block(pre + "ln2.gain").offset;
    const std::size_t o_bb2 = layout.block(pre + "ln2.bias").offset;
    const std::size_t o_w1 = layout.block(pre + "ff.w1").offset;
    const std::size_t o_fb1 = layout.block(pre + "ff.b1").offset;
    const std::size_t o_w2 = layout.block(pre + "ff.w2").offset;
    const std::size_t o_fb2 = layout.block(pre + "ff.b2").offset;

    // feed-forward backward; dx currently holds d(x_out)
    std::vector<S>& dg = ws.dg;
    dg.assign(static_cast<std::size_t>(N) * f, S(0.0));
    la::gemm(false, false, N, f, d, 1.0, dx.data(), theta + o_w2, 0.0, dg.data());
    la::gemm(true, false, d, f, N, 1.0, dx.data(), L.g.data(), 1.0, grad + o_w2);
    col_sums_into(dx, grad + o_fb2, N, d);

    std::vector<S>& dh1 = ws.dh1;
    dh1.resize(dg.size());
    for (std::size_t idx = 0; idx < dg.size(); ++idx)
      dh1[idx] = dg[idx] * gelu_grad(L.h1[idx]);

    std::vector<S>& da2 = ws.da2;
    da2.assign(static_cast<std::size_t>(N) * d, S(0.0));
    la::gemm(false, false, N, d, f, 1.0, dh1.data(), theta + o_w1, 0.0, da2.data());
    la::gemm(true, false, f, d, N, 1.0, dh1.data(), L.a2.data(), 1.0, grad + o_w1);
    col_sums_into(dh1, grad + o_fb1, N, f);

    // dx becomes d(x_mid): residual passthrough plus the LN2 path
    layer_norm_bwd(L.x_mid.data(), theta + o_g2, L.mu2.data(), L.rstd2.data(), da2.data(),
                   dx.data(), grad + o_g2, grad + o_bb2, N, d);

    // attention backward
    std::vector<S>& dactx = ws.dactx;
    dactx.assign(static_cast<std::size_t>(N) * d, S(0.0));
    la::gemm(false, false, N, d, d, 1.0, dx.data(), theta + o_wo, 0.0, dactx.data());
    la::gemm(true, false, d, d, N, 1.0, dx.data(), L.actx.data(), 1.0, grad + o_wo);
    col_sums_into(dx, grad + o_bo, N, d);

    std::vector<S>& dq = ws.dq;
    std::vector<S>& dk = ws.dk;
    std::vector<S>& dv = ws.dv;
    dq.assign(static_cast<std::size_t>(N) * d, S(0.0));
    dk.assign(static_cast<std::size_t>(N) * d, S(0.0));
    dv.assign(static_cast<std::size_t>(N) * d, S(0.0));
    std::vector<S> dp(static_cast<std::size_t>(T) * T);
    for (int i = 0; i < n; ++i)
      for (int hh = 0; hh < nh; ++hh) {
        const S* p = L.p.data() + ((static_cast<std::size_t>(i) * nh + hh) * T) * T;
        for (int t = 0; t < T; ++t) {
          const S* darow = dactx.data() + (static_cast<std::size_t>(i) * T + t) * d + hh * hd;
          S dot_pd(0.0);
          for (int u = 0; u <= t; ++u) {
            const S* vrow = L.v.data() + (static_cast<std::size_t>(i) * T + u) * d + hh * hd;
            S s(0.0);
            for (int c = 0; c < hd; ++c) s += darow[c] * vrow[c];
            dp[static_cast<std::size_t>(t) * T + u] = s;
            dot_pd += p[t * T + u] * s;
            S* dvrow = dv.data() + (static_cast<std::size_t>(i) * T + u) * d + hh * hd;
            const S w = p[t * T + u];
            for (int c = 0; c < hd; ++c) dvrow[c] += w * darow[c];
          }
          const S* qrow = L.q.data() + (static_cast<std::size_t>(i) * T + t) * d + hh * hd;
          S* dqrow = dq.data() + (static_cast<std::size_t>(i) * T + t) * d + hh * hd;
          for (int u = 0; u <= t; ++u) {
            const S ds = p[t * T + u] * (dp[static_cast<std::size_t>(t) * T + u] - dot_pd) * S(scale);
            const S* krow = L.k.data() + (static_cast<std::size_t>(i) * T + u) * d + hh * hd;
            S* dkrow = dk.data() + (static_cast<std::size_t>(i) * T + u) * d + hh * hd;
            for (int c = 0; c < hd; ++c) {
              dqrow[c] += ds * krow[c];
              dkrow[c] += ds * qrow[c];
            }
          }
        }
      }

    std::vector<S>& da1 = ws.da1;
    da1.assign(static_cast<std::size_t>(N) * d, S(0.0));
    la::gemm(false, false, N, d, d, 1.0, dq.data(), theta + o_wq, 0.0, da1.data());
    la::gemm(false, false, N, d, d, 1.0, dk.data(), theta + o_wk, 1.0, da1.data());
    la::gemm(false, false, N, d, d, 1.0, dv.data(), theta + o_wv, 1.0, da1.data());
    la::gemm(true, false, d, d, N, 1.0, dq.data(), L.a1.data(), 1.0, grad + o_wq);
    la::gemm(true, false, d, d, N, 1.0, dk.data(), L.a1.data(), 1.0, grad + o_wk);
    la::gemm(true, false, d, d, N, 1.0, dv.data(), L.a1.data(), 1.0, grad + o_wv);
    col_sums_into(dq, grad + o_bq, N, d);
    col_sums_into(dk, grad + o_bk, N, d);
    col_sums_into(dv, grad + o_bv, N, d);

    // dx becomes d(x_in)
    layer_norm_bwd(L.x_in.data(), theta + o_g1, L.mu1.data(), L.rstd1.data(), da1.data(),
                   dx.data(), grad + o_g1, grad + o_bb1, N, d);
  }

  // embedding scatter
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < T; ++t) {
      const std::int32_t tok = batch.tokens[static_cast<std::size_t>(i) * T + t];
      const S* row = dx.data() + (static_cast<std::size_t>(i) * T + t) * d;
      S* ge = grad + o_emb + static_cast<std::size_t>(tok) * d;
      S* gp = grad + o_pos + static_cast<std::size_t>(t) * d;
      for (int c = 0; c < d; ++c) {
        ge[c] += row[c];
        gp[c] += row[c];
      }
    }
  return rep;
}

template <class S>
LossReport run_model(const ModelConfig& cfg, const ParamLayout& layout, const S* theta,
                     const Batch& batch, S* grad, ActivationRecord* rec,
                     std::vector<double>* logits_out) {
  if (cfg.arch == Arch::mlp)
    return run_mlp(cfg, layout, theta, batch, grad, rec, logits_out);
  return run_transformer(cfg, layout, theta, batch, grad, rec, logits_out);
}

std::shared_ptr<const ParamLayout> build_layout(const ModelConfig& cfg) {
  auto layout = std::make_shared<ParamLayout>();
  std::size_t off = 0;
  auto add = [&](const std::string& name, ParamKind kind, std::vector<int> shape) {
    ParamBlock b;
    b.name = name;
    b.kind = kind;
    b.shape = std::move(shape);
    b.offset = off;
    off += b.size();
    layout->blocks.push_back(std::move(b));
  };

  const int d = cfg.width;
  add("tok_embed", ParamKind::embedding, {cfg.vocab_size, d});
  if (cfg.arch == Arch::mlp) {
    const int h = 2 * d;
    add("mlp.w1", ParamKind::weight_matrix, {h, 2 * d});
    add("mlp.b1", ParamKind::bias, {h});
    add("mlp.w2", ParamKind::weight_matrix, {d, h});
    add("mlp.b2", ParamKind::bias, {d});
  } else {
    add("pos_embed", ParamKind::embedding, {cfg.context_len, d});
    for (int l = 0; l < cfg.depth; ++l) {
      const std::string pre = "block" + std::to_string(l) + ".";
      add(pre + "ln1.gain", ParamKind::norm_gain, {d});
      add(pre + "ln1.bias", ParamKind::bias, {d});
      add(pre + "attn.wq", ParamKind::weight_matrix, {d, d});
      add(pre + "attn.bq", ParamKind::bias, {d});
      add(pre + "attn.wk", ParamKind::weight_matrix, {d, d});
      add(pre + "attn.bk", ParamKind::bias, {d});
      add(pre + "attn.wv", ParamKind::weight_matrix, {d, d});
      add(pre + "attn.bv", ParamKind::bias, {d});
      add(pre + "attn.wo", ParamKind::weight_matrix, {d, d});
      add(pre + "attn.bo", ParamKind::bias, {d});
      add(pre + "ln2.gain", ParamKind::norm_gain, {d});
      add(pre + "ln2.bias", ParamKind::bias, {d});
      add(pre + "ff.w1", ParamKind::weight_matrix, {4 * d, d});
      add(pre + "ff.b1", ParamKind::bias, {4 * d});
      add(pre + "ff.w2", ParamKind::weight_matrix, {d, 4 * d});
      add(pre + "ff.b2", ParamKind::bias, {d});
    }
    add("final.gain", ParamKind::norm_gain, {d});
    add("final.bias", ParamKind::bias, {d});
  }
  layout->total = off;
  return layout;
}

}  // namespace

Model::Model(const ModelConfig& cfg) : cfg_(cfg) {
  if (cfg.width <= 0) throw ConfigError("model.width must be positive");
  if (cfg.vocab_size <= 0) throw ConfigError("model.vocab_size must be positive");
  if (cfg.answer_classes <= 0 || cfg.answer_classes > cfg.vocab_size)
    throw ConfigError("model.answer_classes out of range");
  if (cfg.arch == Arch::transformer) {
    if (cfg.depth <= 0) throw ConfigError("model.depth must be positive");
    if (cfg.heads <= 0 || cfg.width % cfg.heads != 0)
      throw ConfigError("model.width must be divisible by model.heads");
  }
  if (!cfg.tied_embeddings) throw ConfigError("model.tied_embeddings must stay enabled");
  layout_ = build_layout(cfg_);
}

std::size_t Model::non_embedding_param_count() const {
  std::size_t n = 0;
  for (const auto& b : layout_->blocks)
    if (b.kind != ParamKind::embedding) n += b.size();
  return n;
}

std::vector<std::string> Model::activation_layer_names() const {
  if (cfg_.arch == Arch::mlp) return {"embed_concat", "hidden", "readout"};
  std::vector<std::string> names{"embed"};
  for (int l = 0; l < cfg_.depth; ++l) names.push_back("block" + std::to_string(l));
  names.push_back("final_norm");
  return names;
}

ParamVector Model::init_params(std::uint64_t seed) const {
  ParamVector p = make_params(layout_);
  Rng rng(seed);
  for (const auto& b : layout_->blocks) {
    double* dst = p.values.data() + b.offset;
    switch (b.kind) {
      case ParamKind::bias:
        break;  // zeros
      case ParamKind::norm_gain:
        std::fill(dst, dst + b.size(), 1.0);
        break;
      case ParamKind::weight_matrix: {
        const double bound = 1.0 / std::sqrt(static_cast<double>(b.shape.at(1)));
        for (std::size_t i = 0; i < b.size(); ++i) dst[i] = rng.uniform(-bound, bound);
        break;
      }
      case ParamKind::embedding: {
        const double bound = 1.0 / std::sqrt(static_cast<double>(b.shape.at(1)));
        for (std::size_t i = 0; i < b.size(); ++i) dst[i] = rng.uniform(-bound, bound);
        break;
      }
    }
  }
  return p;
}

void Model::check_batch(const Batch& batch) const {
  if (batch.context_len != cfg_.context_len)
    throw RuntimeFault("batch context length mismatch");
  if (batch.tokens.size() != static_cast<std::size_t>(batch.n) * cfg_.context_len ||
      batch.labels.size() != static_cast<std::size_t>(batch.n))
    throw RuntimeFault("batch shape mismatch");
  for (std::int32_t t : batch.tokens)
    if (t < 0 || t >= cfg_.vocab_size) throw RuntimeFault("token id out of vocabulary");
  for (std::int32_t y : batch.labels)
    if (y < 0 || y >= cfg_.answer_classes) throw RuntimeFault("label out of range");
}

LossReport Model::forward_loss(ConstSpan params, const Batch& batch, ActivationRecord* rec,
                               std::vector<double>* logits_out) const {
  if (params.size() != layout_->total) throw RuntimeFault("param size mismatch");
  check_batch(batch);
  if (batch.n == 0) return {};
  return run_model<double>(cfg_, *layout_, params.data(), batch, nullptr, rec, logits_out);
}

LossReport Model::backward(ConstSpan params, const Batch& batch, Span grad) const {
  if (params.size() != layout_->total || grad.size() != layout_->total)
    throw RuntimeFault("param size mismatch");
  check_batch(batch);
  std::fill(grad.begin(), grad.end(), 0.0);
  if (batch.n == 0) return {};
  return run_model<double>(cfg_, *layout_, params.data(), batch, grad.data(), nullptr, nullptr);
}

void Model::hvp(ConstSpan params, const Batch& batch, ConstSpan v, Span out) const {
  if (params.size() != layout_->total || v.size() != layout_->total ||
      out.size() != layout_->total)
    throw RuntimeFault("hvp dimension mismatch");
  check_batch(batch);
  auto& ws = workspace<Dual>();
  ws.params.resize(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) ws.params[i] = Dual(params[i], v[i]);
  ws.grad.assign(params.size(), Dual(0.0));
  run_model<Dual>(cfg_, *layout_, ws.params.data(), batch, ws.grad.data(), nullptr, nullptr);
  for (std::size_t i = 0; i < params.size(); ++i) out[i] = ws.grad[i].d;
}

}  // namespace groklab
