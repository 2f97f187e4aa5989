#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "pianolm/binary_io.hpp"
#include "pianolm/midi_io/types.hpp"

namespace pianolm::midi_io {

enum class WavEncoding { Pcm16, Float32 };

struct RawAudio {
  std::vector<float> interleaved;
  int channels = 1;
  int sample_rate = 0;
};

/// RIFF/WAVE decoding only (no channel mixing or resampling).
RawAudio decode_wav(std::span<const std::uint8_t> bytes);

/// Decodes PCM16 or float32 WAV, averages channels to mono, resamples to
/// 32 kHz and clamps to [-1, 1].
Waveform ingest_audio(std::span<const std::uint8_t> bytes);

/// An optional comment is stored in a LIST/INFO/ICMT chunk.
Bytes write_wav(const Waveform& wave, WavEncoding encoding = WavEncoding::Float32, std::string_view comment = {});
/// The ICMT comment, or an empty string when absent.
std::string wav_comment(std::span<const std::uint8_t> bytes);

/// Band-limited (windowed sinc) sample rate conversion. Output length is
/// round(n * to / from).
std::vector<float> resample(std::span<const float> input, int from_rate, int to_rate);

}  // namespace pianolm::midi_io
