#pragma once

#include <string>
#include <vector>

namespace pianolm {

inline constexpr int kLowestPianoPitch = 21;
inline constexpr int kHighestPianoPitch = 108;
inline constexpr int kCanonicalSampleRate = 32000;

struct Note {
  int pitch = 60;
  int velocity = 64;
  double onset = 0.0;     // seconds
  double duration = 0.0;  // seconds, raw (no sustain extension)

  double offset() const noexcept { return onset + duration; }
  friend bool operator==(const Note&, const Note&) = default;
};

/// Ordering used everywhere a NoteSequence is canonicalised:
/// onset ascending, ties broken by ascending pitch.
inline bool canonical_less(const Note& a, const Note& b) noexcept {
  if (a.onset != b.onset) return a.onset < b.onset;
  if (a.pitch != b.pitch) return a.pitch < b.pitch;
  if (a.duration != b.duration) return a.duration < b.duration;
  return a.velocity < b.velocity;
}

struct NoteSequence {
  std::vector<Note> notes;
  std::string source_id;

  bool empty() const noexcept { return notes.empty(); }
  std::size_t size() const noexcept { return notes.size(); }
  /// Latest note offset, 0 for an empty sequence.
  double end_time() const noexcept;
  void sort();
  /// Throws InvalidArgument naming the first violated invariant.
  void validate() const;
};

struct Waveform {
  std::vector<float> samples;
  int sample_rate = kCanonicalSampleRate;

  double seconds() const noexcept {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

}  // namespace pianolm
