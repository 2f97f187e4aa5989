#include "pianolm/midi_io/segment.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "pianolm/error.hpp"

namespace pianolm::midi_io {
namespace {

// Platform-independent uniform draw in [0, 1); std::uniform_real_distribution
// is not specified bit-exactly across standard libraries.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

std::vector<std::int64_t> segment_boundaries(std::int64_t total_samples, int sample_rate,
                                             const SegmentOptions& options) {
  if (options.min_seconds <= 0.0 || options.min_seconds > options.max_seconds)
    throw InvalidArgument("segment bounds require 0 < min_seconds <= max_seconds");
  if (total_samples <= 0) return {};

  const double sr = sample_rate;
  const auto keep_min = static_cast<std::int64_t>(
      std::llround(std::min(options.min_seconds, options.keep_remainder_seconds) * sr));
  std::mt19937_64 rng(options.seed);
  std::vector<std::int64_t> bounds{0};
  std::int64_t pos = 0;
  for (;;) {
    const double len_s = options.min_seconds + unit_uniform(rng) * (options.max_seconds - options.min_seconds);
    const auto len = std::max<std::int64_t>(1, std::llround(len_s * sr));
    const auto remaining = total_samples - pos;
    if (remaining > len) {
      pos += len;
      bounds.push_back(pos);
      continue;
    }
    if (bounds.size() == 1 || remaining >= keep_min)
      bounds.push_back(total_samples);
    else
      bounds.back() = total_samples;
    break;
  }
  return bounds;
}

std::vector<AlignedClip> segment(const NoteSequence& performance, const Waveform& audio,
                                 const SegmentOptions& options, SegmentStats* stats) {
  if (audio.sample_rate <= 0) throw InvalidArgument("audio sample rate must be positive");
  const int sr = audio.sample_rate;
  const auto note_samples = static_cast<std::int64_t>(std::ceil(performance.end_time() * sr - 1e-9));
  const auto total = std::max<std::int64_t>(static_cast<std::int64_t>(audio.samples.size()), note_samples);

  SegmentStats local;
  std::vector<AlignedClip> clips;
  const auto bounds = segment_boundaries(total, sr, options);
  if (bounds.size() < 2) {
    if (stats) *stats = local;
    return clips;
  }

  std::vector<int> crossings(performance.notes.size(), 0);
  for (std::size_t c = 0; c + 1 < bounds.size(); ++c) {
    const auto s = bounds[c];
    const auto e = bounds[c + 1];
    const double cs = static_cast<double>(s) / sr;
    const double ce = static_cast<double>(e) / sr;

    AlignedClip clip;
    clip.clip_index = static_cast<int>(c);
    clip.clip_start = cs;
    clip.clip_length = static_cast<double>(e - s) / sr;
    clip.midi.source_id = performance.source_id;
    clip.audio.sample_rate = sr;
    clip.audio.samples.assign(static_cast<std::size_t>(e - s), 0.0f);
    const auto have = static_cast<std::int64_t>(audio.samples.size());
    if (s < have)
      std::copy(audio.samples.begin() + s, audio.samples.begin() + std::min(e, have),
                clip.audio.samples.begin());

    for (std::size_t i = 0; i < performance.notes.size(); ++i) {
      const auto& n = performance.notes[i];
      const double off = n.offset();
      if (n.onset >= ce || off <= cs) continue;
      const double frag_on = std::max(n.onset, cs);
      const double frag_off = std::min(off, ce);
      const double dur = frag_off - frag_on;
      const bool last = c + 2 == bounds.size();
      // sub-sample overhang past the final boundary
      if (last && frag_off < off) local.dropped_duration += off - frag_off;
      const bool truncated = frag_on != n.onset || (frag_off != off && !last);
      if (truncated) crossings[i] = 1;
      if (dur <= 0.0) continue;
      if (truncated && dur < options.min_fragment_seconds) {
        ++local.dropped_fragments;
        local.dropped_duration += dur;
        continue;
      }
      clip.midi.notes.push_back({n.pitch, n.velocity, frag_on - cs, dur});
    }
    clip.midi.sort();
    clips.push_back(std::move(clip));
  }
  for (int c : crossings) local.split_notes += c;
  if (stats) *stats = local;
  return clips;
}

}  // namespace pianolm::midi_io
