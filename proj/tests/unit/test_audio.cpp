#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "pianolm/binary_io.hpp"
#include "pianolm/error.hpp"
#include "pianolm/midi_io/wav.hpp"

using namespace pianolm;
using namespace pianolm::midi_io;

namespace {

/// Minimal WAV writer independent of the library's.
Bytes make_wav(int tag, int channels, int rate, int bits, const std::vector<std::uint8_t>& data) {
  ByteWriter w;
  w.magic("RIFF");
  w.u32(static_cast<std::uint32_t>(36 + data.size()));
  w.magic("WAVE");
  w.magic("fmt ");
  w.u32(16);
  const std::uint8_t head[] = {static_cast<std::uint8_t>(tag), static_cast<std::uint8_t>(tag >> 8),
                               static_cast<std::uint8_t>(channels), 0};
  w.bytes(head);
  w.u32(static_cast<std::uint32_t>(rate));
  w.u32(static_cast<std::uint32_t>(rate * channels * bits / 8));
  const std::uint8_t tail[] = {static_cast<std::uint8_t>(channels * bits / 8), 0, static_cast<std::uint8_t>(bits), 0};
  w.bytes(tail);
  w.magic("data");
  w.u32(static_cast<std::uint32_t>(data.size()));
  w.bytes(data);
  return w.take();
}

std::vector<std::uint8_t> pcm16(const std::vector<int>& values) {
  std::vector<std::uint8_t> out;
  for (int v : values) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
  }
  return out;
}

}  // namespace

TEST(Wav, Pcm16StereoAveragesToMono) {
  const auto bytes = make_wav(1, 2, 32000, 16, pcm16({16384, 0, -32768, -32768, 100, -100}));
  const auto wave = ingest_audio(bytes);
  ASSERT_EQ(wave.samples.size(), 3u);
  EXPECT_FLOAT_EQ(wave.samples[0], 0.25f);
  EXPECT_FLOAT_EQ(wave.samples[1], -1.0f);
  EXPECT_FLOAT_EQ(wave.samples[2], 0.0f);
}

TEST(Wav, Float32RoundTripIsLossless) {
  Waveform w;
  for (int i = 0; i < 1000; ++i) w.samples.push_back(static_cast<float>(std::sin(i * 0.01) * 0.9));
  const auto back = ingest_audio(write_wav(w));
  ASSERT_EQ(back.samples.size(), w.samples.size());
  for (std::size_t i = 0; i < w.samples.size(); ++i) EXPECT_NEAR(back.samples[i], w.samples[i], 1e-7);
}

TEST(Wav, Pcm16WriteRoundTrip) {
  Waveform w;
  w.samples = {0.0f, 0.5f, -0.5f, 1.0f, -1.0f};
  const auto back = ingest_audio(write_wav(w, WavEncoding::Pcm16));
  ASSERT_EQ(back.samples.size(), w.samples.size());
  for (std::size_t i = 0; i < w.samples.size(); ++i) EXPECT_NEAR(back.samples[i], w.samples[i], 1.0 / 32768);
}

TEST(Wav, CommentChunkIsSkippedByReader) {
  Waveform w;
  w.samples = {0.1f, 0.2f, 0.3f};
  const auto bytes = write_wav(w, WavEncoding::Float32, "digest 0123");
  EXPECT_EQ(wav_comment(bytes), "digest 0123");
  EXPECT_EQ(ingest_audio(bytes).samples, w.samples);
  EXPECT_EQ(wav_comment(write_wav(w)), "");
}

TEST(Wav, UnsupportedEncodingNamesTag) {
  const auto bytes = make_wav(7, 1, 8000, 8, {0, 0});  // mu-law
  try {
    ingest_audio(bytes);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("tag"), std::string::npos);
  }
}

TEST(Wav, TwentyFourBitPcmIsRejected) {
  EXPECT_THROW(ingest_audio(make_wav(1, 1, 32000, 24, {0, 0, 0})), FormatError);
}

TEST(Wav, TruncatedHeader) {
  auto bytes = make_wav(1, 1, 32000, 16, pcm16({1, 2}));
  bytes.resize(20);
  EXPECT_THROW(ingest_audio(bytes), ParseError);
}

TEST(Wav, SilenceStaysSilent) {
  const auto bytes = make_wav(1, 2, 44100, 16, pcm16(std::vector<int>(2 * 4410, 0)));
  const auto wave = ingest_audio(bytes);
  for (float s : wave.samples) EXPECT_EQ(s, 0.0f);
}

TEST(Resample, StereoOneSecondAt44k) {
  std::vector<int> v;
  for (int i = 0; i < 44100; ++i) {
    const int s = static_cast<int>(std::lround(8000 * std::sin(2 * std::numbers::pi * 440 * i / 44100.0)));
    v.push_back(s);
    v.push_back(s);
  }
  const auto wave = ingest_audio(make_wav(1, 2, 44100, 16, pcm16(v)));
  EXPECT_EQ(wave.sample_rate, 32000);
  EXPECT_NEAR(static_cast<double>(wave.samples.size()), 32000.0, 1.0);
}

TEST(Resample, IdentityAtSameRate) {
  const std::vector<float> x = {0.1f, -0.2f, 0.3f};
  EXPECT_EQ(resample(x, 32000, 32000), x);
}

TEST(Resample, PreservesInBandSine) {
  const int from = 48000, to = 32000;
  std::vector<float> x(from);
  for (int i = 0; i < from; ++i) x[static_cast<std::size_t>(i)] = static_cast<float>(0.5 * std::sin(2 * std::numbers::pi * 1000.0 * i / from));
  const auto y = resample(x, from, to);
  ASSERT_EQ(y.size(), static_cast<std::size_t>(to));
  double err = 0.0;
  for (int i = 2000; i < to - 2000; ++i)
    err = std::max(err, std::abs(y[static_cast<std::size_t>(i)] - 0.5 * std::sin(2 * std::numbers::pi * 1000.0 * i / to)));
  EXPECT_LT(err, 2e-3);
}

TEST(Resample, AttenuatesAboveNewNyquist) {
  const int from = 48000, to = 32000;
  std::vector<float> x(from);
  for (int i = 0; i < from; ++i) x[static_cast<std::size_t>(i)] = static_cast<float>(0.5 * std::sin(2 * std::numbers::pi * 20000.0 * i / from));
  const auto y = resample(x, from, to);
  double peak = 0.0;
  for (std::size_t i = 2000; i + 2000 < y.size(); ++i) peak = std::max(peak, static_cast<double>(std::abs(y[i])));
  EXPECT_LT(peak, 0.01);
}
