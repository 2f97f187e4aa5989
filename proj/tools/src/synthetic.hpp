#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pianolm/midi_io/types.hpp"

namespace pianolm::cli {

struct SyntheticOptions {
  int pieces = 3;
  double seconds = 5.0;
  std::uint64_t seed = 0;
};

struct SyntheticPiece {
  std::string name;
  NoteSequence midi;
  Waveform audio;
};

/// Random melodic performances rendered with a decaying additive tone.
std::vector<SyntheticPiece> synthetic_corpus(const SyntheticOptions& options);

/// Additive rendering of a note sequence, `seconds` long at 32 kHz.
Waveform render_notes(const NoteSequence& notes, double seconds);

/// Writes <dir>/midi/<name>.mid and <dir>/audio/<name>.wav.
void write_synthetic_corpus(const std::filesystem::path& dir, const SyntheticOptions& options);

}  // namespace pianolm::cli
