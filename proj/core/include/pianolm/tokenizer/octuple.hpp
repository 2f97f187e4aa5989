#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pianolm/midi_io/types.hpp"

namespace pianolm::tokenizer {

enum Stream : int { kPitch = 0, kVelocity, kDuration, kIoi, kPosition, kBar };
inline constexpr int kStreams = 6;
inline constexpr std::array<const char*, kStreams> kStreamNames = {"pitch", "velocity", "duration",
                                                                   "ioi",   "position", "bar"};

/// Special tokens occupy the top four indices of every stream, in this order.
enum class Special : int { Pad = 0, Bos = 1, Eos = 2, Mask = 3 };
inline constexpr int kSpecialCount = 4;

struct TokenizerConfig {
  int pitch_bins = 88;
  int velocity_bins = 64;
  int duration_bins = 1152;
  int ioi_bins = 768;
  int position_bins = 384;
  int bar_bins = 16;
  double duration_tick = 0.010;  // seconds
  double ioi_tick = 0.010;
  double pseudo_bar_seconds = 4.0;

  int payload_bins(int stream) const;
  int vocab_size(int stream) const { return payload_bins(stream) + kSpecialCount; }
  std::array<int, kStreams> vocab_sizes() const;
  int special(int stream, Special s) const { return payload_bins(stream) + static_cast<int>(s); }
  bool is_special(int stream, int token) const { return token >= payload_bins(stream); }
  /// Longest duration the top payload bin decodes to.
  double max_duration() const { return (duration_bins - 1) * duration_tick; }

  friend bool operator==(const TokenizerConfig&, const TokenizerConfig&) = default;
};

/// K x N token array, one row per note plus BOS/EOS framing rows.
class OctupleSequence {
public:
  OctupleSequence() = default;
  explicit OctupleSequence(std::size_t length) {
    for (auto& s : streams_) s.assign(length, 0);
  }

  std::size_t length() const noexcept { return streams_[0].size(); }
  int at(std::size_t row, int stream) const { return streams_[static_cast<std::size_t>(stream)][row]; }
  void set(std::size_t row, int stream, int token) { streams_[static_cast<std::size_t>(stream)][row] = token; }
  std::array<int, kStreams> row(std::size_t r) const;
  void push_row(const std::array<int, kStreams>& tokens);

  const std::vector<std::int32_t>& stream(int s) const { return streams_[static_cast<std::size_t>(s)]; }
  std::vector<std::int32_t>& stream(int s) { return streams_[static_cast<std::size_t>(s)]; }

  friend bool operator==(const OctupleSequence&, const OctupleSequence&) = default;

private:
  std::array<std::vector<std::int32_t>, kStreams> streams_;
};

OctupleSequence tokenize(const NoteSequence& notes, const TokenizerConfig& cfg = {});

/// Inverse mapping. Onsets are rebuilt as the cumulative sum of IOI tokens.
/// Throws StructureError if framing is missing or an interior row holds a
/// special token.
NoteSequence detokenize(const OctupleSequence& seq, const TokenizerConfig& cfg = {});

/// Throws InvalidArgument if any entry is at or above its stream's vocab size.
void check_vocab(const OctupleSequence& seq, const TokenizerConfig& cfg);

enum class PromptCut { HardCut, NoteBoundary };

struct PromptedTokens {
  OctupleSequence tokens;
  double prompt_seconds = 0.0;  // effective prompt length, 0 when the prompt is empty
  std::size_t prompt_notes = 0;
};

/// Prefixes the first prompt_seconds of prompt_midi to the target and
/// tokenizes both as one sequence with a single BOS/EOS pair. Target onsets
/// are shifted by the effective prompt length.
PromptedTokens concat_prompt_detailed(const NoteSequence& prompt_midi, const NoteSequence& target_midi,
                                      double prompt_seconds, PromptCut mode,
                                      const TokenizerConfig& cfg = {});

OctupleSequence concat_prompt(const NoteSequence& prompt_midi, const NoteSequence& target_midi,
                              double prompt_seconds, PromptCut mode, const TokenizerConfig& cfg = {});

PromptCut parse_prompt_cut(const std::string& name);
std::string to_string(PromptCut mode);

}  // namespace pianolm::tokenizer
