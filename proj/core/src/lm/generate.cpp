#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "network.hpp"
#include "pianolm/lm/generate.hpp"
#include "pianolm/lm/model.hpp"

namespace pianolm::lm {

namespace {

using detail::RowVec;

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

int choose(const RowVec<float>& logits, int excluded, const SamplingOptions& opts, std::mt19937_64& rng) {
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(logits.size()));
  for (int j = 0; j < logits.size(); ++j)
    if (j != excluded) order.push_back(j);
  const auto better = [&](int a, int b) { return logits(a) > logits(b) || (logits(a) == logits(b) && a < b); };
  if (opts.greedy || opts.top_k <= 1) return *std::min_element(order.begin(), order.end(), better);
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(opts.top_k), order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), better);
  const double top = logits(order[0]);
  std::vector<double> weights(k);
  for (std::size_t i = 0; i < k; ++i) weights[i] = std::exp((logits(order[i]) - top) / opts.temperature);
  double u = unit_uniform(rng) * std::accumulate(weights.begin(), weights.end(), 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    if (u < weights[i]) return order[i];
    u -= weights[i];
  }
  return order[k - 1];
}

/// Decoder state for incremental AR decoding: per-layer keys and values.
class ArCache {
public:
  ArCache(const ModelParams<float>& p, Eigen::Index capacity) : p_(p) {
    const auto d = p.config.hidden;
    for (std::size_t l = 0; l < p.ar.layers.size(); ++l) {
      keys_.emplace_back(capacity, d);
      values_.emplace_back(capacity, d);
    }
  }

  /// Runs the full prefix and returns the final hidden row.
  RowVec<float> prefill(Mat<float> x, const std::vector<int>& limit) {
    detail::DecoderCache<float> cache;
    const Mat<float> h = detail::decoder_forward(p_.ar, p_.config, std::move(x), limit, &cache, nullptr);
    rows_ = h.rows();
    for (std::size_t l = 0; l < cache.blocks.size(); ++l) {
      keys_[l].topRows(rows_) = cache.blocks[l].attn.k;
      values_[l].topRows(rows_) = cache.blocks[l].attn.v;
    }
    return h.row(rows_ - 1);
  }

  /// Appends one row that sees every cached row and itself.
  RowVec<float> step(const RowVec<float>& input) {
    const auto& cfg = p_.config;
    const auto dh = cfg.head_dim();
    const float scale = 1.0f / std::sqrt(static_cast<float>(dh));
    Mat<float> x = input;
    for (std::size_t l = 0; l < p_.ar.layers.size(); ++l) {
      const auto& layer = p_.ar.layers[l];
      const Mat<float> n1 = detail::layer_norm<float>(x, layer.ln1_gain, layer.ln1_bias, nullptr);
      const RowVec<float> q = n1 * layer.wq + layer.bq;
      keys_[l].row(rows_) = n1 * layer.wk + layer.bk;
      values_[l].row(rows_) = n1 * layer.wv + layer.bv;
      const auto visible = rows_ + 1;
      RowVec<float> context(cfg.hidden);
      for (int h = 0; h < cfg.heads; ++h) {
        const auto k = keys_[l].topRows(visible).middleCols(h * dh, dh);
        const auto v = values_[l].topRows(visible).middleCols(h * dh, dh);
        RowVec<float> scores = (q.segment(h * dh, dh) * k.transpose()) * scale;
        scores = (scores.array() - scores.maxCoeff()).exp().matrix();
        scores /= scores.sum();
        context.segment(h * dh, dh) = scores * v;
      }
      x += context * layer.wo + layer.bo;
      const Mat<float> n2 = detail::layer_norm<float>(x, layer.ln2_gain, layer.ln2_bias, nullptr);
      x += detail::feed_forward<float>(n2, layer, nullptr);
    }
    ++rows_;
    return detail::layer_norm<float>(x, p_.ar.final_gain, p_.ar.final_bias, nullptr);
  }

private:
  const ModelParams<float>& p_;
  std::vector<Mat<float>> keys_, values_;
  Eigen::Index rows_ = 0;
};

void check_length(const ModelConfig& cfg, Eigen::Index n, std::size_t prefix, int max_frames) {
  const auto rows = n + static_cast<Eigen::Index>(prefix) + max_frames;
  if (rows > cfg.max_sequence)
    throw InvalidArgument("generation needs up to " + std::to_string(rows) + " rows, max_sequence is " +
                          std::to_string(cfg.max_sequence) + "; segment the input into shorter clips");
}

Mat<float> ar_prefix_input(const ModelParams<float>& p, const tokenizer::OctupleSequence& midi,
                           const std::vector<int>& prefix, std::vector<int>& limit) {
  const auto& cfg = p.config;
  const auto n = static_cast<Eigen::Index>(midi.length());
  if (n < 1) throw InvalidArgument("empty MIDI token sequence");
  for (int t : prefix)
    if (t < 0 || t >= cfg.codebook_size) throw InvalidArgument("prompt level-1 token out of range");
  const auto pf = static_cast<Eigen::Index>(prefix.size());
  Mat<float> x(n + pf, cfg.hidden);
  x.topRows(n) = embed_pooled(p, midi, Decoder::Ar) + detail::positional_encoding<float>(0, n, cfg.hidden);
  for (Eigen::Index t = 0; t < pf; ++t)
    x.row(n + t) = p.ar_codec_embedding.row(prefix[static_cast<std::size_t>(t)]) +
                   detail::positional_encoding<float>(t, 1, cfg.hidden);
  limit.resize(static_cast<std::size_t>(n + pf));
  for (Eigen::Index i = 0; i < n + pf; ++i) limit[static_cast<std::size_t>(i)] = static_cast<int>(i < n ? n : i + 1);
  return x;
}

}  // namespace

int frame_cap(double target_seconds, double frame_rate, double factor) {
  return static_cast<int>(std::ceil(target_seconds * frame_rate * factor - 1e-9));
}

std::vector<int> generate_level1(const ModelParams<float>& params, const tokenizer::OctupleSequence& midi,
                                 const std::vector<int>& prefix, int max_frames, const SamplingOptions& sampling,
                                 bool* reached_eos) {
  const auto& cfg = params.config;
  const auto n = static_cast<Eigen::Index>(midi.length());
  check_length(cfg, n, prefix.size(), max_frames);
  if (reached_eos) *reached_eos = false;
  std::vector<int> out;
  if (max_frames <= 0) return out;

  std::vector<int> limit;
  ArCache cache(params, n + static_cast<Eigen::Index>(prefix.size()) + max_frames);
  RowVec<float> h = cache.prefill(ar_prefix_input(params, midi, prefix, limit), limit);
  std::mt19937_64 rng(sampling.seed);
  auto position = static_cast<Eigen::Index>(prefix.size());
  while (true) {
    const RowVec<float> logits = h * params.ar_head + params.ar_head_bias;
    const int token = choose(logits, cfg.pad_token(), sampling, rng);
    if (token == cfg.eos_token()) {
      if (reached_eos) *reached_eos = true;
      break;
    }
    out.push_back(token);
    if (static_cast<int>(out.size()) >= max_frames) break;
    h = cache.step(params.ar_codec_embedding.row(token) + detail::positional_encoding<float>(position, 1, cfg.hidden));
    ++position;
  }
  return out;
}

std::vector<int> generate_level1_uncached(const ModelParams<float>& params, const tokenizer::OctupleSequence& midi,
                                          const std::vector<int>& prefix, int max_frames,
                                          const SamplingOptions& sampling) {
  const auto& cfg = params.config;
  check_length(cfg, static_cast<Eigen::Index>(midi.length()), prefix.size(), max_frames);
  std::mt19937_64 rng(sampling.seed);
  std::vector<int> seq = prefix;
  std::vector<int> out;
  while (static_cast<int>(out.size()) < max_frames) {
    std::vector<int> limit;
    const Mat<float> h =
        detail::decoder_forward<float>(params.ar, cfg, ar_prefix_input(params, midi, seq, limit), limit, nullptr, nullptr);
    const RowVec<float> logits = h.row(h.rows() - 1) * params.ar_head + params.ar_head_bias;
    const int token = choose(logits, cfg.pad_token(), sampling, rng);
    if (token == cfg.eos_token()) break;
    out.push_back(token);
    seq.push_back(token);
  }
  return out;
}

GenerateResult generate(const ModelParams<float>& params, const NoteSequence& target,
                        const std::optional<PromptSpec>& prompt, const GenerateOptions& options) {
  const auto& cfg = params.config;
  if (target.empty()) throw InvalidArgument("target MIDI has no notes");
  GenerateResult result;
  tokenizer::OctupleSequence midi;
  codec::CodecMatrix prompt_codes(0, cfg.levels, cfg.codebook_size);
  if (prompt) {
    const auto joined =
        tokenizer::concat_prompt_detailed(prompt->midi, target, prompt->seconds, prompt->cut, options.tokenizer);
    midi = joined.tokens;
    const double audio_span = static_cast<double>(prompt->codes.frames()) / options.frame_rate;
    const double midi_span = std::min(prompt->seconds, prompt->midi.end_time());
    if (std::abs(audio_span - midi_span) > 0.5)
      result.warnings.push_back("prompt audio spans " + std::to_string(audio_span) + " s but prompt MIDI spans " +
                                std::to_string(midi_span) + " s");
    const double keep_seconds =
        prompt->cut == tokenizer::PromptCut::NoteBoundary ? joined.prompt_seconds : prompt->seconds;
    const auto keep = std::min<Eigen::Index>(prompt->codes.frames(),
                                             static_cast<Eigen::Index>(std::lround(keep_seconds * options.frame_rate)));
    prompt_codes = prompt->codes.slice(0, keep);
    if (joined.prompt_notes == 0 && keep > 0)
      result.warnings.push_back("prompt MIDI has no notes inside the prompt window");
  } else {
    midi = tokenizer::tokenize(target, options.tokenizer);
  }
  result.prompt_frames = prompt_codes.frames();

  const double seconds = options.target_seconds > 0.0 ? options.target_seconds : target.end_time();
  result.frame_cap = frame_cap(seconds, options.frame_rate, options.frame_cap_factor);
  std::vector<int> prefix;
  for (Eigen::Index t = 0; t < prompt_codes.frames(); ++t) prefix.push_back(prompt_codes.at(t, 0));
  const auto level1 = generate_level1(params, midi, prefix, result.frame_cap, options.sampling, &result.reached_eos);
  if (!result.reached_eos && result.frame_cap > 0)
    result.warnings.push_back("no EOS within " + std::to_string(result.frame_cap) + " frames; output truncated");

  result.codes = codec::CodecMatrix(static_cast<Eigen::Index>(level1.size()), cfg.levels, cfg.codebook_size);
  for (std::size_t t = 0; t < level1.size(); ++t) result.codes.set(static_cast<Eigen::Index>(t), 0, level1[t]);
  if (level1.empty()) return result;
  for (int level = 2; level <= cfg.levels; ++level) {
    const auto logits = nar_loss(params, midi, result.codes, prompt_codes, level).logits;
    for (Eigen::Index t = 0; t < logits.rows(); ++t) {
      Eigen::Index best = 0;
      for (Eigen::Index j = 1; j < logits.cols(); ++j)
        if (logits(t, j) > logits(t, best)) best = j;
      result.codes.set(t, level - 1, static_cast<std::int32_t>(best));
    }
  }
  return result;
}

}  // namespace pianolm::lm
