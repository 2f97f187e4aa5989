#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "pianolm/tokenizer/octuple.hpp"

namespace pianolm::lm {

struct ModelConfig {
  int layers = 4;
  int heads = 4;
  int hidden = 128;
  int ffn = 512;
  /// Embedding width per MIDI stream (pitch, velocity, duration, ioi, position, bar).
  std::array<int, tokenizer::kStreams> midi_embed_dims = {64, 32, 64, 64, 32, 16};
  std::array<int, tokenizer::kStreams> midi_vocab = tokenizer::TokenizerConfig{}.vocab_sizes();
  int codebook_size = 256;
  int levels = 4;
  int max_sequence = 2048;
  double dropout = 0.0;
  std::uint64_t seed = 0;

  /// 12 layers, 16 heads, width 1024, 2048-entry codebooks.
  static ModelConfig large_preset();
  /// <= 2 layers, width <= 16; the gradient-check configuration.
  static ModelConfig tiny();

  int head_dim() const { return hidden / heads; }
  int midi_concat_dim() const;
  int ar_vocab() const { return codebook_size + 2; }
  int eos_token() const { return codebook_size; }
  int pad_token() const { return codebook_size + 1; }

  /// Throws InvalidArgument on an inconsistent configuration.
  void validate() const;
  std::string to_json() const;
  static ModelConfig from_json(const std::string& text);

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

}  // namespace pianolm::lm
