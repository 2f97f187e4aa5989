#pragma once

// Forward and backward passes shared by training, evaluation, generation and
// the gradient checker, templated on the scalar type.

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "pianolm/codec/rvq.hpp"
#include "pianolm/error.hpp"
#include "pianolm/lm/params.hpp"
#include "pianolm/tokenizer/octuple.hpp"

namespace pianolm::lm::detail {

template <class T>
using RowVec = Eigen::Matrix<T, 1, Eigen::Dynamic>;
template <class T>
using ColVec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

inline constexpr double kLayerNormEps = 1e-5;

/// Inverted dropout driven by a seeded generator; inactive when rate is 0.
struct Dropout {
  double rate = 0.0;
  std::mt19937_64 rng{0};

  bool active() const { return rate > 0.0; }

  template <class T>
  Mat<T> mask(Eigen::Index rows, Eigen::Index cols) {
    Mat<T> m(rows, cols);
    const T keep_scale = static_cast<T>(1.0 / (1.0 - rate));
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      m.data()[i] = u < rate ? T(0) : keep_scale;
    }
    return m;
  }
};

// ---------------------------------------------------------------------------
// Layer norm

template <class T>
struct LayerNormCache {
  Mat<T> xhat;
  ColVec<T> rstd;
};

template <class T>
Mat<T> layer_norm(const Mat<T>& x, const Mat<T>& gain, const Mat<T>& bias, LayerNormCache<T>* cache) {
  const auto rows = x.rows();
  const auto d = x.cols();
  Mat<T> y(rows, d);
  if (cache) {
    cache->xhat.resize(rows, d);
    cache->rstd.resize(rows);
  }
  for (Eigen::Index i = 0; i < rows; ++i) {
    const T mean = x.row(i).mean();
    const T var = (x.row(i).array() - mean).square().mean();
    const T rstd = T(1) / std::sqrt(var + static_cast<T>(kLayerNormEps));
    const RowVec<T> xhat = (x.row(i).array() - mean) * rstd;
    y.row(i) = (xhat.array() * gain.array() + bias.array()).matrix();
    if (cache) {
      cache->xhat.row(i) = xhat;
      cache->rstd(i) = rstd;
    }
  }
  return y;
}

template <class T>
Mat<T> layer_norm_backward(const Mat<T>& dy, const Mat<T>& gain, const LayerNormCache<T>& c, Mat<T>& dgain,
                           Mat<T>& dbias) {
  dgain += (dy.array() * c.xhat.array()).colwise().sum().matrix();
  dbias += dy.colwise().sum();
  Mat<T> dx(dy.rows(), dy.cols());
  for (Eigen::Index i = 0; i < dy.rows(); ++i) {
    const RowVec<T> dxhat = (dy.row(i).array() * gain.array()).matrix();
    const T m1 = dxhat.mean();
    const T m2 = (dxhat.array() * c.xhat.row(i).array()).mean();
    dx.row(i) = (c.rstd(i) * (dxhat.array() - m1 - c.xhat.row(i).array() * m2)).matrix();
  }
  return dx;
}

// ---------------------------------------------------------------------------
// GELU (tanh approximation)

template <class T>
T gelu(T x) {
  constexpr double c = 0.7978845608028654;  // sqrt(2/pi)
  const T inner = static_cast<T>(c) * (x + static_cast<T>(0.044715) * x * x * x);
  return static_cast<T>(0.5) * x * (T(1) + std::tanh(inner));
}

template <class T>
T gelu_grad(T x) {
  constexpr double c = 0.7978845608028654;
  const T inner = static_cast<T>(c) * (x + static_cast<T>(0.044715) * x * x * x);
  const T t = std::tanh(inner);
  const T dinner = static_cast<T>(c) * (T(1) + static_cast<T>(3 * 0.044715) * x * x);
  return static_cast<T>(0.5) * (T(1) + t) + static_cast<T>(0.5) * x * (T(1) - t * t) * dinner;
}

// ---------------------------------------------------------------------------
// Multi-head attention with a per-row visible-key prefix.
//
// Row i attends to keys [0, limit[i]). Masked probabilities are exactly zero,
// so keys outside the prefix cannot influence row i at all.

template <class T>
struct AttentionCache {
  Mat<T> input;
  Mat<T> q, k, v;
  std::vector<Mat<T>> probs;
  Mat<T> context;
};

template <class T>
void masked_softmax_rows(Mat<T>& scores, const std::vector<int>& limit) {
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const Eigen::Index lim = limit[static_cast<std::size_t>(i)];
    auto row = scores.row(i);
    const T mx = row.head(lim).maxCoeff();
    T sum = 0;
    for (Eigen::Index j = 0; j < lim; ++j) {
      row(j) = std::exp(row(j) - mx);
      sum += row(j);
    }
    const T inv = T(1) / sum;
    for (Eigen::Index j = 0; j < lim; ++j) row(j) *= inv;
    for (Eigen::Index j = lim; j < row.size(); ++j) row(j) = T(0);
  }
}

template <class T>
Mat<T> attention(const Mat<T>& x, const LayerParams<T>& p, int heads, const std::vector<int>& limit,
                 AttentionCache<T>* cache) {
  const auto s = x.rows();
  const auto d = x.cols();
  const auto dh = d / heads;
  const T scale = T(1) / std::sqrt(static_cast<T>(dh));
  Mat<T> q = (x * p.wq).rowwise() + p.bq.row(0);
  Mat<T> k = (x * p.wk).rowwise() + p.bk.row(0);
  Mat<T> v = (x * p.wv).rowwise() + p.bv.row(0);
  Mat<T> context(s, d);
  if (cache) cache->probs.resize(static_cast<std::size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    const Mat<T> qh = q.middleCols(h * dh, dh);
    const Mat<T> kh = k.middleCols(h * dh, dh);
    const Mat<T> vh = v.middleCols(h * dh, dh);
    Mat<T> probs = (qh * kh.transpose()) * scale;
    masked_softmax_rows(probs, limit);
    context.middleCols(h * dh, dh).noalias() = probs * vh;
    if (cache) cache->probs[static_cast<std::size_t>(h)] = std::move(probs);
  }
  Mat<T> out = (context * p.wo).rowwise() + p.bo.row(0);
  if (cache) {
    cache->input = x;
    cache->q = std::move(q);
    cache->k = std::move(k);
    cache->v = std::move(v);
    cache->context = std::move(context);
  }
  return out;
}

template <class T>
Mat<T> attention_backward(const Mat<T>& dout, const LayerParams<T>& p, int heads, const AttentionCache<T>& c,
                          LayerParams<T>& g) {
  const auto d = dout.cols();
  const auto s = dout.rows();
  const auto dh = d / heads;
  const T scale = T(1) / std::sqrt(static_cast<T>(dh));
  g.wo.noalias() += c.context.transpose() * dout;
  g.bo += dout.colwise().sum();
  const Mat<T> dcontext = dout * p.wo.transpose();
  Mat<T> dq(s, d), dk(s, d), dv(s, d);
  for (int h = 0; h < heads; ++h) {
    const auto& probs = c.probs[static_cast<std::size_t>(h)];
    const Mat<T> dctx_h = dcontext.middleCols(h * dh, dh);
    const Mat<T> vh = c.v.middleCols(h * dh, dh);
    const Mat<T> qh = c.q.middleCols(h * dh, dh);
    const Mat<T> kh = c.k.middleCols(h * dh, dh);
    Mat<T> dprobs = dctx_h * vh.transpose();
    dv.middleCols(h * dh, dh).noalias() = probs.transpose() * dctx_h;
    const ColVec<T> row_dot = (dprobs.array() * probs.array()).rowwise().sum();
    Mat<T> dscores = (probs.array() * (dprobs.array().colwise() - row_dot.array())).matrix() * scale;
    dq.middleCols(h * dh, dh).noalias() = dscores * kh;
    dk.middleCols(h * dh, dh).noalias() = dscores.transpose() * qh;
  }
  g.wq.noalias() += c.input.transpose() * dq;
  g.wk.noalias() += c.input.transpose() * dk;
  g.wv.noalias() += c.input.transpose() * dv;
  g.bq += dq.colwise().sum();
  g.bk += dk.colwise().sum();
  g.bv += dv.colwise().sum();
  Mat<T> dx = dq * p.wq.transpose();
  dx.noalias() += dk * p.wk.transpose();
  dx.noalias() += dv * p.wv.transpose();
  return dx;
}

// ---------------------------------------------------------------------------
// Feed-forward

template <class T>
struct FfnCache {
  Mat<T> input;
  Mat<T> pre;
  Mat<T> act;
};

template <class T>
Mat<T> feed_forward(const Mat<T>& x, const LayerParams<T>& p, FfnCache<T>* cache) {
  Mat<T> pre = (x * p.w1).rowwise() + p.b1.row(0);
  Mat<T> act = pre.unaryExpr([](T v) { return gelu(v); });
  Mat<T> out = (act * p.w2).rowwise() + p.b2.row(0);
  if (cache) {
    cache->input = x;
    cache->pre = std::move(pre);
    cache->act = std::move(act);
  }
  return out;
}

template <class T>
Mat<T> feed_forward_backward(const Mat<T>& dout, const LayerParams<T>& p, const FfnCache<T>& c, LayerParams<T>& g) {
  g.w2.noalias() += c.act.transpose() * dout;
  g.b2 += dout.colwise().sum();
  Mat<T> dpre = dout * p.w2.transpose();
  dpre.array() *= c.pre.unaryExpr([](T v) { return gelu_grad(v); }).array();
  g.w1.noalias() += c.input.transpose() * dpre;
  g.b1 += dpre.colwise().sum();
  return dpre * p.w1.transpose();
}

// ---------------------------------------------------------------------------
// Pre-norm decoder stack

template <class T>
struct BlockCache {
  LayerNormCache<T> ln1, ln2;
  AttentionCache<T> attn;
  FfnCache<T> ffn;
  Mat<T> drop1, drop2;  // empty when dropout is inactive
};

template <class T>
struct DecoderCache {
  std::vector<BlockCache<T>> blocks;
  LayerNormCache<T> final_ln;
};

template <class T>
Mat<T> decoder_forward(const DecoderParams<T>& p, const ModelConfig& cfg, Mat<T> x, const std::vector<int>& limit,
                       DecoderCache<T>* cache, Dropout* dropout) {
  if (cache) cache->blocks.resize(p.layers.size());
  const bool drop = dropout && dropout->active();
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const auto& layer = p.layers[l];
    BlockCache<T>* bc = cache ? &cache->blocks[l] : nullptr;
    Mat<T> n1 = layer_norm(x, layer.ln1_gain, layer.ln1_bias, bc ? &bc->ln1 : nullptr);
    Mat<T> a = attention(n1, layer, cfg.heads, limit, bc ? &bc->attn : nullptr);
    if (drop) {
      Mat<T> m = dropout->mask<T>(a.rows(), a.cols());
      a.array() *= m.array();
      if (bc) bc->drop1 = std::move(m);
    }
    x += a;
    Mat<T> n2 = layer_norm(x, layer.ln2_gain, layer.ln2_bias, bc ? &bc->ln2 : nullptr);
    Mat<T> f = feed_forward(n2, layer, bc ? &bc->ffn : nullptr);
    if (drop) {
      Mat<T> m = dropout->mask<T>(f.rows(), f.cols());
      f.array() *= m.array();
      if (bc) bc->drop2 = std::move(m);
    }
    x += f;
  }
  return layer_norm(x, p.final_gain, p.final_bias, cache ? &cache->final_ln : nullptr);
}

template <class T>
Mat<T> decoder_backward(const DecoderParams<T>& p, const ModelConfig& cfg, const DecoderCache<T>& cache,
                        const Mat<T>& dout, DecoderParams<T>& g) {
  Mat<T> dx = layer_norm_backward(dout, p.final_gain, cache.final_ln, g.final_gain, g.final_bias);
  for (std::size_t li = p.layers.size(); li-- > 0;) {
    const auto& layer = p.layers[li];
    auto& gl = g.layers[li];
    const auto& bc = cache.blocks[li];
    Mat<T> df = dx;
    if (bc.drop2.size() > 0) df.array() *= bc.drop2.array();
    Mat<T> dn2 = feed_forward_backward(df, layer, bc.ffn, gl);
    dx += layer_norm_backward(dn2, layer.ln2_gain, bc.ln2, gl.ln2_gain, gl.ln2_bias);
    Mat<T> da = dx;
    if (bc.drop1.size() > 0) da.array() *= bc.drop1.array();
    Mat<T> dn1 = attention_backward(da, layer, cfg.heads, bc.attn, gl);
    dx += layer_norm_backward(dn1, layer.ln1_gain, bc.ln1, gl.ln1_gain, gl.ln1_bias);
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Embeddings

/// Sinusoidal encodings for positions [first, first + count).
template <class T>
Mat<T> positional_encoding(Eigen::Index first, Eigen::Index count, Eigen::Index d) {
  Mat<T> pe(count, d);
  for (Eigen::Index i = 0; i < count; ++i) {
    const double pos = static_cast<double>(first + i);
    for (Eigen::Index j = 0; j < d; j += 2) {
      const double freq = std::pow(10000.0, -static_cast<double>(j) / static_cast<double>(d));
      pe(i, j) = static_cast<T>(std::sin(pos * freq));
      if (j + 1 < d) pe(i, j + 1) = static_cast<T>(std::cos(pos * freq));
    }
  }
  return pe;
}

template <class T>
void check_midi_tokens(const tokenizer::OctupleSequence& seq, const ModelConfig& cfg) {
  for (std::size_t r = 0; r < seq.length(); ++r)
    for (int s = 0; s < tokenizer::kStreams; ++s) {
      const int t = seq.at(r, s);
      if (t < 0 || t >= cfg.midi_vocab[static_cast<std::size_t>(s)])
        throw InvalidArgument("MIDI token " + std::to_string(t) + " out of range at (row " + std::to_string(r) +
                              ", stream " + tokenizer::kStreamNames[static_cast<std::size_t>(s)] + ")");
    }
}

/// Concatenated per-stream embeddings, N x concat_dim.
template <class T>
Mat<T> midi_concat(const MidiEmbedding<T>& e, const tokenizer::OctupleSequence& seq, const ModelConfig& cfg) {
  check_midi_tokens<T>(seq, cfg);
  const auto n = static_cast<Eigen::Index>(seq.length());
  Mat<T> out(n, cfg.midi_concat_dim());
  Eigen::Index col = 0;
  for (int s = 0; s < tokenizer::kStreams; ++s) {
    const auto& table = e.tables[static_cast<std::size_t>(s)];
    for (Eigen::Index r = 0; r < n; ++r) out.row(r).segment(col, table.cols()) = table.row(seq.at(static_cast<std::size_t>(r), s));
    col += table.cols();
  }
  return out;
}

template <class T>
void midi_backward(const MidiEmbedding<T>& e, const tokenizer::OctupleSequence& seq, const Mat<T>& concat,
                   const Mat<T>& dpooled, MidiEmbedding<T>& g) {
  g.projection.noalias() += concat.transpose() * dpooled;
  const Mat<T> dconcat = dpooled * e.projection.transpose();
  Eigen::Index col = 0;
  for (int s = 0; s < tokenizer::kStreams; ++s) {
    auto& table = g.tables[static_cast<std::size_t>(s)];
    for (Eigen::Index r = 0; r < dconcat.rows(); ++r)
      table.row(seq.at(static_cast<std::size_t>(r), s)) += dconcat.row(r).segment(col, table.cols());
    col += table.cols();
  }
}

// ---------------------------------------------------------------------------
// Cross-entropy

/// Mean negative log-likelihood over rows; optionally writes d(loss)/d(logits).
template <class T>
double cross_entropy(const Mat<T>& logits, std::span<const int> targets, Mat<T>* dlogits) {
  const auto m = logits.rows();
  if (static_cast<std::size_t>(m) != targets.size()) throw InvalidArgument("logit/target count mismatch");
  if (m == 0) {
    if (dlogits) dlogits->resize(0, logits.cols());
    return 0.0;
  }
  if (dlogits) dlogits->resize(m, logits.cols());
  double total = 0.0;
  const T inv_m = T(1) / static_cast<T>(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const int target = targets[static_cast<std::size_t>(i)];
    if (target < 0 || target >= logits.cols()) throw InvalidArgument("target class out of range");
    const T mx = logits.row(i).maxCoeff();
    const RowVec<T> e = (logits.row(i).array() - mx).exp().matrix();
    const T sum = e.sum();
    total += static_cast<double>(std::log(sum) + mx - logits(i, target));
    if (dlogits) {
      dlogits->row(i) = e * (inv_m / sum);
      (*dlogits)(i, target) -= inv_m;
    }
  }
  return total / static_cast<double>(m);
}

// ---------------------------------------------------------------------------
// AR and NAR objectives

template <class T>
struct Objective {
  double loss = 0.0;
  Mat<T> logits;
  std::vector<int> targets;
};

inline void check_level1(std::span<const int> level1, const ModelConfig& cfg) {
  if (level1.empty() || level1.back() != cfg.eos_token())
    throw InvalidArgument("level-1 sequence must end with EOS");
  for (std::size_t t = 0; t + 1 < level1.size(); ++t)
    if (level1[t] < 0 || level1[t] >= cfg.codebook_size)
      throw InvalidArgument("level-1 token " + std::to_string(level1[t]) + " out of range at frame " + std::to_string(t));
}

/// AR input rows: pooled MIDI then level-1 codec embeddings (EOS excluded).
/// Row i < N sees the MIDI span only; codec row i sees rows [0, i].
template <class T>
Objective<T> ar_objective(const ModelParams<T>& p, const tokenizer::OctupleSequence& midi,
                          std::span<const int> level1, ModelParams<T>* grad, T grad_scale, Dropout* dropout) {
  const auto& cfg = p.config;
  check_level1(level1, cfg);
  const auto n = static_cast<Eigen::Index>(midi.length());
  const auto frames = static_cast<Eigen::Index>(level1.size()) - 1;
  const auto s = n + frames;
  if (n < 1) throw InvalidArgument("empty MIDI token sequence");
  if (s > cfg.max_sequence)
    throw InvalidArgument("AR input of " + std::to_string(s) + " rows exceeds max_sequence " +
                          std::to_string(cfg.max_sequence) + "; segment the input into shorter clips");
  const auto d = cfg.hidden;

  const Mat<T> concat = midi_concat(p.ar.midi, midi, cfg);
  Mat<T> x(s, d);
  x.topRows(n) = concat * p.ar.midi.projection + positional_encoding<T>(0, n, d);
  if (frames > 0) {
    x.bottomRows(frames) = positional_encoding<T>(0, frames, d);
    for (Eigen::Index t = 0; t < frames; ++t) x.row(n + t) += p.ar_codec_embedding.row(level1[static_cast<std::size_t>(t)]);
  }
  std::vector<int> limit(static_cast<std::size_t>(s));
  for (Eigen::Index i = 0; i < s; ++i) limit[static_cast<std::size_t>(i)] = static_cast<int>(i < n ? n : i + 1);

  DecoderCache<T> cache;
  const Mat<T> h = decoder_forward(p.ar, cfg, std::move(x), limit, grad ? &cache : nullptr, dropout);
  const Mat<T> rows = h.middleRows(n - 1, frames + 1);

  Objective<T> out;
  out.targets.assign(level1.begin(), level1.end());
  out.logits = (rows * p.ar_head).rowwise() + p.ar_head_bias.row(0);
  Mat<T> dlogits;
  out.loss = cross_entropy(out.logits, out.targets, grad ? &dlogits : nullptr);
  if (!grad) return out;

  dlogits *= grad_scale;
  grad->ar_head.noalias() += rows.transpose() * dlogits;
  grad->ar_head_bias += dlogits.colwise().sum();
  Mat<T> dh = Mat<T>::Zero(s, d);
  dh.middleRows(n - 1, frames + 1) = dlogits * p.ar_head.transpose();
  const Mat<T> dx = decoder_backward(p.ar, cfg, cache, dh, grad->ar);
  midi_backward(p.ar.midi, midi, concat, Mat<T>(dx.topRows(n)), grad->ar.midi);
  for (Eigen::Index t = 0; t < frames; ++t)
    grad->ar_codec_embedding.row(level1[static_cast<std::size_t>(t)]) += dx.row(n + t);
  return out;
}

inline void check_codes(const codec::CodecMatrix& c, const ModelConfig& cfg, const char* what) {
  if (c.frames() > 0 && c.levels() != cfg.levels)
    throw InvalidArgument(std::string(what) + " has " + std::to_string(c.levels()) + " levels, model expects " +
                          std::to_string(cfg.levels));
  for (Eigen::Index t = 0; t < c.frames(); ++t)
    for (int l = 0; l < c.levels(); ++l)
      if (c.at(t, l) < 0 || c.at(t, l) >= cfg.codebook_size)
        throw InvalidArgument(std::string(what) + " index out of range at (frame " + std::to_string(t) + ", level " +
                              std::to_string(l + 1) + ")");
}

/// NAR input rows: pooled MIDI, prompt frames (sum over all levels), target
/// frames (sum over levels below `level` plus the level embedding). Attention
/// is unmasked. Loss covers the target frames' level-`level` tokens.
template <class T>
Objective<T> nar_objective(const ModelParams<T>& p, const tokenizer::OctupleSequence& midi,
                           const codec::CodecMatrix& target, const codec::CodecMatrix& prompt, int level,
                           ModelParams<T>* grad, T grad_scale, Dropout* dropout) {
  const auto& cfg = p.config;
  if (level < 2 || level > cfg.levels)
    throw InvalidArgument("NAR level " + std::to_string(level) + " outside 2.." + std::to_string(cfg.levels));
  check_codes(target, cfg, "target codec matrix");
  check_codes(prompt, cfg, "prompt codec matrix");
  const auto n = static_cast<Eigen::Index>(midi.length());
  const auto pf = prompt.frames();
  const auto tf = target.frames();
  const auto s = n + pf + tf;
  if (n < 1) throw InvalidArgument("empty MIDI token sequence");
  if (s > cfg.max_sequence)
    throw InvalidArgument("NAR input of " + std::to_string(s) + " rows exceeds max_sequence " +
                          std::to_string(cfg.max_sequence) + "; segment the input into shorter clips");
  const auto d = cfg.hidden;
  const auto li = static_cast<std::size_t>(level - 2);

  const Mat<T> concat = midi_concat(p.nar.midi, midi, cfg);
  Mat<T> x(s, d);
  x.topRows(n) = concat * p.nar.midi.projection + positional_encoding<T>(0, n, d);
  if (pf + tf > 0) x.bottomRows(pf + tf) = positional_encoding<T>(0, pf + tf, d);
  for (Eigen::Index t = 0; t < pf; ++t)
    for (int l = 0; l < cfg.levels; ++l) x.row(n + t) += p.nar_codec_embedding[static_cast<std::size_t>(l)].row(prompt.at(t, l));
  for (Eigen::Index t = 0; t < tf; ++t) {
    for (int l = 0; l < level - 1; ++l)
      x.row(n + pf + t) += p.nar_codec_embedding[static_cast<std::size_t>(l)].row(target.at(t, l));
    x.row(n + pf + t) += p.nar_level_embedding.row(static_cast<Eigen::Index>(li));
  }
  const std::vector<int> limit(static_cast<std::size_t>(s), static_cast<int>(s));

  DecoderCache<T> cache;
  const Mat<T> h = decoder_forward(p.nar, cfg, std::move(x), limit, grad ? &cache : nullptr, dropout);
  const Mat<T> rows = h.bottomRows(tf);

  Objective<T> out;
  out.targets.resize(static_cast<std::size_t>(tf));
  for (Eigen::Index t = 0; t < tf; ++t) out.targets[static_cast<std::size_t>(t)] = target.at(t, level - 1);
  out.logits = (rows * p.nar_head[li]).rowwise() + p.nar_head_bias[li].row(0);
  Mat<T> dlogits;
  out.loss = cross_entropy(out.logits, out.targets, grad ? &dlogits : nullptr);
  if (!grad || tf == 0) return out;

  dlogits *= grad_scale;
  grad->nar_head[li].noalias() += rows.transpose() * dlogits;
  grad->nar_head_bias[li] += dlogits.colwise().sum();
  Mat<T> dh = Mat<T>::Zero(s, d);
  dh.bottomRows(tf) = dlogits * p.nar_head[li].transpose();
  const Mat<T> dx = decoder_backward(p.nar, cfg, cache, dh, grad->nar);
  midi_backward(p.nar.midi, midi, concat, Mat<T>(dx.topRows(n)), grad->nar.midi);
  for (Eigen::Index t = 0; t < pf; ++t)
    for (int l = 0; l < cfg.levels; ++l)
      grad->nar_codec_embedding[static_cast<std::size_t>(l)].row(prompt.at(t, l)) += dx.row(n + t);
  for (Eigen::Index t = 0; t < tf; ++t) {
    for (int l = 0; l < level - 1; ++l)
      grad->nar_codec_embedding[static_cast<std::size_t>(l)].row(target.at(t, l)) += dx.row(n + pf + t);
    grad->nar_level_embedding.row(static_cast<Eigen::Index>(li)) += dx.row(n + pf + t);
  }
  return out;
}

}  // namespace pianolm::lm::detail
