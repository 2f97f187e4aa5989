#pragma once

#include <cstdint>
#include <vector>

#include "pianolm/midi_io/types.hpp"

namespace pianolm::midi_io {

struct AlignedClip {
  NoteSequence midi;  // onsets relative to clip start
  Waveform audio;
  double clip_start = 0.0;
  double clip_length = 0.0;
  int clip_index = 0;
};

struct SegmentOptions {
  double min_seconds = 15.0;
  double max_seconds = 20.0;
  std::uint64_t seed = 0;
  /// A trailing remainder shorter than min_seconds survives as its own clip
  /// when at least this long, otherwise it is merged into the previous clip.
  double keep_remainder_seconds = 5.0;
  /// Fragments produced by boundary truncation shorter than this are dropped.
  double min_fragment_seconds = 0.010;
};

struct SegmentStats {
  int split_notes = 0;
  int dropped_fragments = 0;
  double dropped_duration = 0.0;
};

/// Cuts an aligned performance into clips whose lengths are drawn uniformly
/// from [min_seconds, max_seconds]. Boundaries fall on sample positions. A
/// note crossing a boundary is truncated there and its tail continues in the
/// next clip at onset 0.
std::vector<AlignedClip> segment(const NoteSequence& performance, const Waveform& audio,
                                 const SegmentOptions& options, SegmentStats* stats = nullptr);

/// Clip boundaries only, in samples: clip i spans [b[i], b[i+1]).
std::vector<std::int64_t> segment_boundaries(std::int64_t total_samples, int sample_rate,
                                             const SegmentOptions& options);

}  // namespace pianolm::midi_io
