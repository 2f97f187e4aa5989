#include "network.hpp"
#include "pianolm/lm/model.hpp"

namespace pianolm::lm {

template <class T>
Mat<T> embed_pooled(const ModelParams<T>& params, const tokenizer::OctupleSequence& midi, Decoder which) {
  const auto& e = which == Decoder::Ar ? params.ar.midi : params.nar.midi;
  return detail::midi_concat(e, midi, params.config) * e.projection;
}

std::vector<int> level1_with_eos(const codec::CodecMatrix& codes, const ModelConfig& config) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(codes.frames()) + 1);
  for (Eigen::Index t = 0; t < codes.frames(); ++t) out.push_back(codes.at(t, 0));
  out.push_back(config.eos_token());
  return out;
}

template Mat<float> embed_pooled(const ModelParams<float>&, const tokenizer::OctupleSequence&, Decoder);
template Mat<double> embed_pooled(const ModelParams<double>&, const tokenizer::OctupleSequence&, Decoder);

}  // namespace pianolm::lm
