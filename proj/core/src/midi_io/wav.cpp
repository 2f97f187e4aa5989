#include "pianolm/midi_io/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <string>

#include "pianolm/error.hpp"

namespace pianolm::midi_io {
namespace {

constexpr std::uint16_t kTagPcm = 0x0001;
constexpr std::uint16_t kTagFloat = 0x0003;
constexpr std::uint16_t kTagExtensible = 0xfffe;

std::string tag_name(std::uint16_t tag) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "0x%04x", tag);
  switch (tag) {
    case kTagPcm: return std::string(buf) + " (PCM)";
    case kTagFloat: return std::string(buf) + " (IEEE float)";
    case 0x0006: return std::string(buf) + " (A-law)";
    case 0x0007: return std::string(buf) + " (mu-law)";
    case 0x0002: return std::string(buf) + " (MS ADPCM)";
    case 0x0011: return std::string(buf) + " (IMA ADPCM)";
    default: return buf;
  }
}

std::uint16_t u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

}  // namespace

RawAudio decode_wav(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic("RIFF");
  r.u32();
  r.expect_magic("WAVE");

  bool have_fmt = false;
  std::uint16_t tag = 0;
  int channels = 0;
  int rate = 0;
  int bits = 0;
  std::size_t fmt_at = 0;
  while (!r.at_end()) {
    const auto chunk_at = r.offset();
    if (r.remaining() < 8) break;  // tolerate trailing padding
    auto id_bytes = r.bytes(4);
    const std::string id(id_bytes.begin(), id_bytes.end());
    const auto len = r.u32();
    if (len > r.remaining()) throw ParseError("chunk '" + id + "' exceeds file size", chunk_at);
    auto body = r.bytes(len);
    if (len % 2 == 1 && !r.at_end()) r.bytes(1);

    if (id == "fmt ") {
      if (len < 16) throw ParseError("fmt chunk shorter than 16 bytes", chunk_at);
      fmt_at = chunk_at;
      tag = u16(body, 0);
      channels = u16(body, 2);
      rate = static_cast<int>(body[4] | (body[5] << 8) | (body[6] << 16) | (std::uint32_t{body[7]} << 24));
      bits = u16(body, 14);
      if (tag == kTagExtensible) {
        if (len < 40) throw ParseError("extensible fmt chunk shorter than 40 bytes", chunk_at);
        tag = u16(body, 24);  // first two bytes of the sub-format GUID
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw ParseError("data chunk before fmt chunk", chunk_at);
      const bool pcm16 = tag == kTagPcm && bits == 16;
      const bool f32 = tag == kTagFloat && bits == 32;
      if (!pcm16 && !f32)
        throw FormatError("unsupported WAV encoding: format tag " + tag_name(tag) + ", " +
                          std::to_string(bits) + " bits per sample (need PCM16 or float32)");
      if (channels <= 0 || rate <= 0)
        throw ParseError("invalid channel count or sample rate", fmt_at);
      RawAudio out;
      out.channels = channels;
      out.sample_rate = rate;
      const std::size_t width = pcm16 ? 2 : 4;
      const std::size_t frames = body.size() / (width * static_cast<std::size_t>(channels));
      out.interleaved.resize(frames * static_cast<std::size_t>(channels));
      for (std::size_t i = 0; i < out.interleaved.size(); ++i) {
        const std::size_t at = i * width;
        if (pcm16) {
          out.interleaved[i] = static_cast<float>(static_cast<std::int16_t>(u16(body, at))) / 32768.0f;
        } else {
          const std::uint32_t v = body[at] | (body[at + 1] << 8) | (body[at + 2] << 16) |
                                  (std::uint32_t{body[at + 3]} << 24);
          out.interleaved[i] = std::bit_cast<float>(v);
        }
      }
      return out;
    }
  }
  throw ParseError("no data chunk", bytes.size());
}

Waveform ingest_audio(std::span<const std::uint8_t> bytes) {
  const RawAudio raw = decode_wav(bytes);
  const auto channels = static_cast<std::size_t>(raw.channels);
  const std::size_t frames = raw.interleaved.size() / channels;
  std::vector<float> mono(frames);
  if (channels == 1) {
    mono = raw.interleaved;
  } else {
    for (std::size_t f = 0; f < frames; ++f) {
      double acc = 0.0;
      for (std::size_t c = 0; c < channels; ++c) acc += raw.interleaved[f * channels + c];
      mono[f] = static_cast<float>(acc / static_cast<double>(channels));
    }
  }
  Waveform out;
  out.sample_rate = kCanonicalSampleRate;
  out.samples = raw.sample_rate == kCanonicalSampleRate
                    ? std::move(mono)
                    : resample(mono, raw.sample_rate, kCanonicalSampleRate);
  for (auto& s : out.samples) {
    if (!(s == s)) s = 0.0f;  // NaN
    s = std::clamp(s, -1.0f, 1.0f);
  }
  return out;
}

Bytes write_wav(const Waveform& wave, WavEncoding encoding, std::string_view comment) {
  const bool f32 = encoding == WavEncoding::Float32;
  const std::uint32_t width = f32 ? 4 : 2;
  const auto data_len = static_cast<std::uint32_t>(wave.samples.size() * width);
  // LIST/INFO/ICMT chunk holding a NUL-terminated, even-padded comment
  const auto icmt_len = static_cast<std::uint32_t>(comment.size() + 1);
  const std::uint32_t icmt_padded = icmt_len + (icmt_len % 2);
  const std::uint32_t list_len = comment.empty() ? 0 : 4 + 8 + icmt_padded;
  ByteWriter w;
  w.magic("RIFF");
  w.u32(36 + (list_len ? 8 + list_len : 0) + data_len + (data_len % 2));
  w.magic("WAVE");
  w.magic("fmt ");
  w.u32(16);
  const std::uint16_t tag = f32 ? kTagFloat : kTagPcm;
  const std::uint8_t fmt[] = {
      static_cast<std::uint8_t>(tag), static_cast<std::uint8_t>(tag >> 8), 1, 0};
  w.bytes(fmt);
  w.u32(static_cast<std::uint32_t>(wave.sample_rate));
  w.u32(static_cast<std::uint32_t>(wave.sample_rate) * width);
  const std::uint8_t align_bits[] = {static_cast<std::uint8_t>(width), 0,
                                     static_cast<std::uint8_t>(width * 8), 0};
  w.bytes(align_bits);
  if (list_len) {
    w.magic("LIST");
    w.u32(list_len);
    w.magic("INFO");
    w.magic("ICMT");
    w.u32(icmt_len);
    w.bytes(std::span(reinterpret_cast<const std::uint8_t*>(comment.data()), comment.size()));
    const std::uint8_t zeros[] = {0, 0};
    w.bytes(std::span(zeros, icmt_padded - comment.size()));
  }
  w.magic("data");
  w.u32(data_len);
  for (float s : wave.samples) {
    if (f32) {
      w.f32(s);
    } else {
      const float c = std::clamp(s, -1.0f, 1.0f);
      const auto v = static_cast<std::int16_t>(std::lround(std::clamp(c * 32768.0f, -32768.0f, 32767.0f)));
      const auto u = static_cast<std::uint16_t>(v);
      const std::uint8_t b[] = {static_cast<std::uint8_t>(u), static_cast<std::uint8_t>(u >> 8)};
      w.bytes(b);
    }
  }
  if (data_len % 2) {
    const std::uint8_t pad[] = {0};
    w.bytes(pad);
  }
  return w.take();
}

std::string wav_comment(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic("RIFF");
  r.u32();
  r.expect_magic("WAVE");
  while (r.remaining() >= 8) {
    auto id_bytes = r.bytes(4);
    const std::string id(id_bytes.begin(), id_bytes.end());
    const auto len = r.u32();
    if (len > r.remaining()) break;
    auto body = r.bytes(len);
    if (len % 2 == 1 && !r.at_end()) r.bytes(1);
    if (id != "LIST" || len < 12 || std::string(body.begin(), body.begin() + 4) != "INFO") continue;
    std::size_t at = 4;
    while (at + 8 <= body.size()) {
      const std::string sub(body.begin() + static_cast<std::ptrdiff_t>(at), body.begin() + static_cast<std::ptrdiff_t>(at + 4));
      const std::size_t n = body[at + 4] | (body[at + 5] << 8) | (body[at + 6] << 16) | (std::size_t{body[at + 7]} << 24);
      if (at + 8 + n > body.size()) break;
      if (sub == "ICMT") {
        std::string text(body.begin() + static_cast<std::ptrdiff_t>(at + 8), body.begin() + static_cast<std::ptrdiff_t>(at + 8 + n));
        while (!text.empty() && text.back() == '\0') text.pop_back();
        return text;
      }
      at += 8 + n + (n % 2);
    }
  }
  return {};
}

}  // namespace pianolm::midi_io
