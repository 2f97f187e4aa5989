#include <cmath>
#include <numbers>
#include <random>

#include "json.hpp"
#include "pianolm/error.hpp"
#include "pianolm/lm/params.hpp"

namespace pianolm::lm {

ModelConfig ModelConfig::large_preset() {
  ModelConfig c;
  c.layers = 12;
  c.heads = 16;
  c.hidden = 1024;
  c.ffn = 4096;
  c.midi_embed_dims = {256, 128, 256, 256, 128, 64};
  c.codebook_size = 2048;
  c.levels = 4;
  c.max_sequence = 4096;
  c.dropout = 0.1;
  return c;
}

ModelConfig ModelConfig::tiny() {
  ModelConfig c;
  c.layers = 2;
  c.heads = 2;
  c.hidden = 16;
  c.ffn = 32;
  c.midi_embed_dims = {4, 4, 4, 4, 4, 4};
  c.codebook_size = 8;
  c.levels = 4;
  c.max_sequence = 256;
  return c;
}

int ModelConfig::midi_concat_dim() const {
  int total = 0;
  for (int d : midi_embed_dims) total += d;
  return total;
}

void ModelConfig::validate() const {
  if (layers < 1 || heads < 1 || hidden < 1 || ffn < 1) throw InvalidArgument("model dimensions must be positive");
  if (hidden % heads != 0)
    throw InvalidArgument("hidden dim " + std::to_string(hidden) + " not divisible by " + std::to_string(heads) +
                          " heads");
  for (int s = 0; s < tokenizer::kStreams; ++s) {
    if (midi_embed_dims[static_cast<std::size_t>(s)] < 1) throw InvalidArgument("MIDI embedding dims must be positive");
    if (midi_vocab[static_cast<std::size_t>(s)] < 1) throw InvalidArgument("MIDI vocab sizes must be positive");
  }
  if (codebook_size < 1 || levels < 1) throw InvalidArgument("codec vocabulary must be non-empty");
  if (max_sequence < 2) throw InvalidArgument("max_sequence too small");
  if (dropout < 0.0 || dropout >= 1.0) throw InvalidArgument("dropout must lie in [0, 1)");
}

std::string ModelConfig::to_json() const {
  nlohmann::ordered_json j;
  j["layers"] = layers;
  j["heads"] = heads;
  j["hidden"] = hidden;
  j["ffn"] = ffn;
  j["midi_embed_dims"] = midi_embed_dims;
  j["midi_vocab"] = midi_vocab;
  j["codebook_size"] = codebook_size;
  j["levels"] = levels;
  j["max_sequence"] = max_sequence;
  j["dropout"] = dropout;
  j["seed"] = seed;
  return j.dump();
}

ModelConfig ModelConfig::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ModelConfig c;
  c.layers = j.value("layers", c.layers);
  c.heads = j.value("heads", c.heads);
  c.hidden = j.value("hidden", c.hidden);
  c.ffn = j.value("ffn", c.ffn);
  if (j.contains("midi_embed_dims")) c.midi_embed_dims = j["midi_embed_dims"].get<std::array<int, 6>>();
  if (j.contains("midi_vocab")) c.midi_vocab = j["midi_vocab"].get<std::array<int, 6>>();
  c.codebook_size = j.value("codebook_size", c.codebook_size);
  c.levels = j.value("levels", c.levels);
  c.max_sequence = j.value("max_sequence", c.max_sequence);
  c.dropout = j.value("dropout", c.dropout);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

namespace {

template <class T>
void list_decoder(const std::string& prefix, DecoderParams<T>& d, std::vector<typename ModelParams<T>::Tensor>& out) {
  for (int s = 0; s < tokenizer::kStreams; ++s)
    out.push_back({prefix + "midi." + tokenizer::kStreamNames[static_cast<std::size_t>(s)], &d.midi.tables[static_cast<std::size_t>(s)]});
  out.push_back({prefix + "midi.projection", &d.midi.projection});
  for (std::size_t i = 0; i < d.layers.size(); ++i) {
    auto& l = d.layers[i];
    const auto p = prefix + "layer" + std::to_string(i) + ".";
    out.push_back({p + "ln1.gain", &l.ln1_gain});
    out.push_back({p + "ln1.bias", &l.ln1_bias});
    out.push_back({p + "attn.wq", &l.wq});
    out.push_back({p + "attn.bq", &l.bq});
    out.push_back({p + "attn.wk", &l.wk});
    out.push_back({p + "attn.bk", &l.bk});
    out.push_back({p + "attn.wv", &l.wv});
    out.push_back({p + "attn.bv", &l.bv});
    out.push_back({p + "attn.wo", &l.wo});
    out.push_back({p + "attn.bo", &l.bo});
    out.push_back({p + "ln2.gain", &l.ln2_gain});
    out.push_back({p + "ln2.bias", &l.ln2_bias});
    out.push_back({p + "ffn.w1", &l.w1});
    out.push_back({p + "ffn.b1", &l.b1});
    out.push_back({p + "ffn.w2", &l.w2});
    out.push_back({p + "ffn.b2", &l.b2});
  }
  out.push_back({prefix + "final.gain", &d.final_gain});
  out.push_back({prefix + "final.bias", &d.final_bias});
}

template <class T>
DecoderParams<T> decoder_shapes(const ModelConfig& c) {
  DecoderParams<T> d;
  for (int s = 0; s < tokenizer::kStreams; ++s)
    d.midi.tables[static_cast<std::size_t>(s)] =
        Mat<T>::Zero(c.midi_vocab[static_cast<std::size_t>(s)], c.midi_embed_dims[static_cast<std::size_t>(s)]);
  d.midi.projection = Mat<T>::Zero(c.midi_concat_dim(), c.hidden);
  d.layers.resize(static_cast<std::size_t>(c.layers));
  for (auto& l : d.layers) {
    l.ln1_gain = Mat<T>::Zero(1, c.hidden);
    l.ln1_bias = Mat<T>::Zero(1, c.hidden);
    l.wq = Mat<T>::Zero(c.hidden, c.hidden);
    l.bq = Mat<T>::Zero(1, c.hidden);
    l.wk = Mat<T>::Zero(c.hidden, c.hidden);
    l.bk = Mat<T>::Zero(1, c.hidden);
    l.wv = Mat<T>::Zero(c.hidden, c.hidden);
    l.bv = Mat<T>::Zero(1, c.hidden);
    l.wo = Mat<T>::Zero(c.hidden, c.hidden);
    l.bo = Mat<T>::Zero(1, c.hidden);
    l.ln2_gain = Mat<T>::Zero(1, c.hidden);
    l.ln2_bias = Mat<T>::Zero(1, c.hidden);
    l.w1 = Mat<T>::Zero(c.hidden, c.ffn);
    l.b1 = Mat<T>::Zero(1, c.ffn);
    l.w2 = Mat<T>::Zero(c.ffn, c.hidden);
    l.b2 = Mat<T>::Zero(1, c.hidden);
  }
  d.final_gain = Mat<T>::Zero(1, c.hidden);
  d.final_bias = Mat<T>::Zero(1, c.hidden);
  return d;
}

class Gaussian {
public:
  explicit Gaussian(std::uint64_t seed) : rng_(seed) {}
  double operator()() {
    // Box-Muller on a portable uniform source
    const double u1 = (static_cast<double>(rng_() >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

private:
  std::mt19937_64 rng_;
};

template <class T>
void fill(Mat<T>& m, Gaussian& g, double std) {
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<T>(g() * std);
}

template <class T>
void init_decoder(DecoderParams<T>& d, const ModelConfig& c, Gaussian& g) {
  for (auto& t : d.midi.tables) fill(t, g, 1.0);
  fill(d.midi.projection, g, 1.0 / std::sqrt(static_cast<double>(c.midi_concat_dim())));
  const double proj_std = 1.0 / std::sqrt(static_cast<double>(c.hidden));
  const double out_std = proj_std / std::sqrt(2.0 * c.layers);
  for (auto& l : d.layers) {
    l.ln1_gain.setOnes();
    l.ln2_gain.setOnes();
    fill(l.wq, g, proj_std);
    fill(l.wk, g, proj_std);
    fill(l.wv, g, proj_std);
    fill(l.wo, g, out_std);
    fill(l.w1, g, proj_std);
    fill(l.w2, g, out_std * std::sqrt(static_cast<double>(c.hidden) / c.ffn));
  }
  d.final_gain.setOnes();
}

}  // namespace

template <class T>
std::vector<typename ModelParams<T>::Tensor> ModelParams<T>::tensors() {
  std::vector<Tensor> out;
  list_decoder<T>("ar.", ar, out);
  out.push_back({"ar.codec_embedding", &ar_codec_embedding});
  out.push_back({"ar.head", &ar_head});
  out.push_back({"ar.head_bias", &ar_head_bias});
  list_decoder<T>("nar.", nar, out);
  for (std::size_t l = 0; l < nar_codec_embedding.size(); ++l)
    out.push_back({"nar.codec_embedding" + std::to_string(l + 1), &nar_codec_embedding[l]});
  out.push_back({"nar.level_embedding", &nar_level_embedding});
  for (std::size_t l = 0; l < nar_head.size(); ++l) {
    out.push_back({"nar.head" + std::to_string(l + 2), &nar_head[l]});
    out.push_back({"nar.head_bias" + std::to_string(l + 2), &nar_head_bias[l]});
  }
  return out;
}

template <class T>
std::vector<typename ModelParams<T>::ConstTensor> ModelParams<T>::tensors() const {
  auto mutable_list = const_cast<ModelParams<T>*>(this)->tensors();
  std::vector<ConstTensor> out;
  out.reserve(mutable_list.size());
  for (auto& t : mutable_list) out.push_back({std::move(t.name), t.value});
  return out;
}

template <class T>
std::size_t ModelParams<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors()) n += static_cast<std::size_t>(t.value->size());
  return n;
}

template <class T>
bool ModelParams<T>::all_finite() const {
  for (const auto& t : tensors())
    if (!t.value->allFinite()) return false;
  return true;
}

template <class T>
void ModelParams<T>::set_zero() {
  for (auto& t : tensors()) t.value->setZero();
}

template <class T>
ModelParams<T> ModelParams<T>::zeros_like(const ModelConfig& c) {
  c.validate();
  ModelParams<T> p;
  p.config = c;
  p.ar = decoder_shapes<T>(c);
  p.nar = decoder_shapes<T>(c);
  p.ar_codec_embedding = Mat<T>::Zero(c.ar_vocab(), c.hidden);
  p.ar_head = Mat<T>::Zero(c.hidden, c.ar_vocab());
  p.ar_head_bias = Mat<T>::Zero(1, c.ar_vocab());
  for (int l = 0; l < c.levels; ++l) p.nar_codec_embedding.push_back(Mat<T>::Zero(c.codebook_size, c.hidden));
  p.nar_level_embedding = Mat<T>::Zero(std::max(c.levels - 1, 0), c.hidden);
  for (int l = 1; l < c.levels; ++l) {
    p.nar_head.push_back(Mat<T>::Zero(c.hidden, c.codebook_size));
    p.nar_head_bias.push_back(Mat<T>::Zero(1, c.codebook_size));
  }
  return p;
}

template <class T>
ModelParams<T> ModelParams<T>::initialize(const ModelConfig& c) {
  auto p = zeros_like(c);
  Gaussian g(c.seed);
  init_decoder(p.ar, c, g);
  init_decoder(p.nar, c, g);
  fill(p.ar_codec_embedding, g, 1.0);
  const double head_std = 1.0 / std::sqrt(static_cast<double>(c.hidden));
  fill(p.ar_head, g, head_std);
  for (auto& e : p.nar_codec_embedding) fill(e, g, 1.0);
  fill(p.nar_level_embedding, g, 1.0);
  for (auto& h : p.nar_head) fill(h, g, head_std);
  return p;
}

template <class T>
template <class U>
ModelParams<U> ModelParams<T>::cast() const {
  auto out = ModelParams<U>::zeros_like(config);
  auto src = tensors();
  auto dst = out.tensors();
  for (std::size_t i = 0; i < src.size(); ++i) *dst[i].value = src[i].value->template cast<U>();
  return out;
}

template struct ModelParams<float>;
template struct ModelParams<double>;
template ModelParams<double> ModelParams<float>::cast<double>() const;
template ModelParams<float> ModelParams<double>::cast<float>() const;
template ModelParams<float> ModelParams<float>::cast<float>() const;
template ModelParams<double> ModelParams<double>::cast<double>() const;

}  // namespace pianolm::lm
