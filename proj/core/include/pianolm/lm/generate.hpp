#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pianolm/codec/rvq.hpp"
#include "pianolm/lm/params.hpp"
#include "pianolm/midi_io/types.hpp"
#include "pianolm/tokenizer/octuple.hpp"

namespace pianolm::lm {

struct PromptSpec {
  NoteSequence midi;
  codec::CodecMatrix codes;  // all L levels, 50 frames per second
  double seconds = 3.0;
  tokenizer::PromptCut cut = tokenizer::PromptCut::HardCut;
};

struct SamplingOptions {
  bool greedy = false;
  int top_k = 16;
  double temperature = 1.0;
  std::uint64_t seed = 0;
};

struct GenerateOptions {
  SamplingOptions sampling;
  double frame_rate = 50.0;
  double frame_cap_factor = 1.25;
  /// Target length for the frame cap; 0 uses the target MIDI's end time.
  double target_seconds = 0.0;
  tokenizer::TokenizerConfig tokenizer;
};

struct GenerateResult {
  codec::CodecMatrix codes;  // generated frames only, prompt excluded
  bool reached_eos = false;
  int frame_cap = 0;
  Eigen::Index prompt_frames = 0;
  std::vector<std::string> warnings;
};

/// Frames allowed for a target of the given length: ceil(seconds * rate * factor).
int frame_cap(double target_seconds, double frame_rate, double factor);

/// AR sampling of level 1 with a key/value cache, then greedy NAR levels 2..L.
GenerateResult generate(const ModelParams<float>& params, const NoteSequence& target,
                        const std::optional<PromptSpec>& prompt, const GenerateOptions& options = {});

/// Greedy-or-sampled AR pass without the cache, for cross-checking.
std::vector<int> generate_level1_uncached(const ModelParams<float>& params, const tokenizer::OctupleSequence& midi,
                                          const std::vector<int>& prefix, int max_frames,
                                          const SamplingOptions& sampling);

/// The same AR pass through the cache; level-1 tokens after `prefix`, EOS excluded.
std::vector<int> generate_level1(const ModelParams<float>& params, const tokenizer::OctupleSequence& midi,
                                 const std::vector<int>& prefix, int max_frames, const SamplingOptions& sampling,
                                 bool* reached_eos = nullptr);

}  // namespace pianolm::lm
