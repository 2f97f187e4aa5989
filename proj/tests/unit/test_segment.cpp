#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "pianolm/midi_io/segment.hpp"

using namespace pianolm;
using namespace pianolm::midi_io;

namespace {

Waveform silence(double seconds) {
  Waveform w;
  w.samples.assign(static_cast<std::size_t>(std::lround(seconds * w.sample_rate)), 0.0f);
  return w;
}

double total_duration(const NoteSequence& ns) {
  double s = 0.0;
  for (const auto& n : ns.notes) s += n.duration;
  return s;
}

}  // namespace

TEST(Segment, SixteenSecondsIsOneClip) {
  NoteSequence ns;
  ns.notes = {{60, 80, 1.0, 2.0}};
  const auto clips = segment(ns, silence(16.0), {});
  ASSERT_EQ(clips.size(), 1u);
  EXPECT_DOUBLE_EQ(clips[0].clip_length, 16.0);
  EXPECT_EQ(clips[0].audio.samples.size(), 16u * 32000u);
}

TEST(Segment, NoteCrossingBoundaryIsSplit) {
  NoteSequence ns;
  ns.notes = {{60, 80, 14.0, 3.0}};
  SegmentOptions opts;
  opts.min_seconds = opts.max_seconds = 15.0;
  SegmentStats stats;
  const auto clips = segment(ns, silence(30.0), opts, &stats);
  ASSERT_EQ(clips.size(), 2u);
  ASSERT_EQ(clips[0].midi.size(), 1u);
  ASSERT_EQ(clips[1].midi.size(), 1u);
  EXPECT_NEAR(clips[0].midi.notes[0].onset, 14.0, 1e-9);
  EXPECT_NEAR(clips[0].midi.notes[0].duration, 1.0, 1e-9);
  EXPECT_NEAR(clips[1].midi.notes[0].onset, 0.0, 1e-9);
  EXPECT_NEAR(clips[1].midi.notes[0].duration, 2.0, 1e-9);
  EXPECT_EQ(stats.split_notes, 1);
}

TEST(Segment, EmptyPerformanceGivesNoClips) {
  EXPECT_TRUE(segment(NoteSequence{}, Waveform{}, {}).empty());
}

TEST(Segment, RemainderRules) {
  // 15 + 6 s: remainder >= 5 s is kept
  SegmentOptions opts;
  opts.min_seconds = opts.max_seconds = 15.0;
  auto b = segment_boundaries(21 * 32000, 32000, opts);
  ASSERT_EQ(b.size(), 3u);
  EXPECT_EQ(b[1], 15 * 32000);
  // 15 + 4 s: remainder merges into the previous clip
  b = segment_boundaries(19 * 32000, 32000, opts);
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b[1], 19 * 32000);
}

TEST(Segment, DeterministicForSeed) {
  SegmentOptions opts;
  opts.seed = 42;
  EXPECT_EQ(segment_boundaries(200 * 32000, 32000, opts), segment_boundaries(200 * 32000, 32000, opts));
  opts.seed = 43;
  SegmentOptions other;
  other.seed = 42;
  EXPECT_NE(segment_boundaries(200 * 32000, 32000, opts), segment_boundaries(200 * 32000, 32000, other));
}

TEST(Segment, ConservationOverRandomCases) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    NoteSequence ns;
    const double length = 20.0 + static_cast<double>(rng() % 8000) / 100.0;
    const int notes = 1 + static_cast<int>(rng() % 60);
    for (int i = 0; i < notes; ++i) {
      const double onset = static_cast<double>(rng() % static_cast<std::uint64_t>((length - 1.0) * 1000)) / 1000.0;
      const double dur = 0.02 + static_cast<double>(rng() % 3000) / 1000.0;
      ns.notes.push_back({21 + static_cast<int>(rng() % 88), 1 + static_cast<int>(rng() % 127), onset,
                          std::min(dur, length - onset)});
    }
    ns.sort();
    SegmentOptions opts;
    opts.seed = rng();
    SegmentStats stats;
    const auto clips = segment(ns, silence(length), opts, &stats);
    ASSERT_FALSE(clips.empty());

    double clip_sum = 0.0, note_sum = 0.0;
    std::size_t count = 0;
    for (std::size_t c = 0; c < clips.size(); ++c) {
      const auto& clip = clips[c];
      clip_sum += clip.clip_length;
      note_sum += total_duration(clip.midi);
      count += clip.midi.size();
      if (c + 1 < clips.size()) {
        EXPECT_GE(clip.clip_length, opts.min_seconds - 1e-9);
        EXPECT_LE(clip.clip_length, opts.max_seconds + 1e-9);
      } else if (clips.size() > 1) {
        EXPECT_GE(clip.clip_length, opts.keep_remainder_seconds - 1e-9);
        EXPECT_LT(clip.clip_length, opts.max_seconds + opts.keep_remainder_seconds);
      }
      for (const auto& n : clip.midi.notes) {
        EXPECT_GE(n.onset, 0.0);
        EXPECT_LE(n.offset(), clip.clip_length + 1e-9);
      }
      EXPECT_EQ(clip.audio.samples.size(), static_cast<std::size_t>(std::lround(clip.clip_length * 32000)));
    }
    EXPECT_NEAR(clip_sum, length, 1e-6);
    EXPECT_NEAR(note_sum + stats.dropped_duration, total_duration(ns), 1e-6);
    EXPECT_EQ(count + static_cast<std::size_t>(stats.dropped_fragments),
              ns.size() + static_cast<std::size_t>(stats.split_notes));
  }
}

TEST(Segment, AudioFollowsClipBoundaries) {
  Waveform w;
  for (int i = 0; i < 40 * 32000; ++i) w.samples.push_back(static_cast<float>(i % 1000) / 1000.0f);
  NoteSequence ns;
  ns.notes = {{60, 80, 0.0, 1.0}};
  SegmentOptions opts;
  opts.seed = 3;
  const auto clips = segment(ns, w, opts);
  std::size_t at = 0;
  for (const auto& c : clips) {
    EXPECT_EQ(static_cast<std::size_t>(std::lround(c.clip_start * 32000)), at);
    for (std::size_t i = 0; i < c.audio.samples.size(); i += 997) EXPECT_EQ(c.audio.samples[i], w.samples[at + i]);
    at += c.audio.samples.size();
  }
  EXPECT_EQ(at, w.samples.size());
}
