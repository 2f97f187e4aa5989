#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pianolm/codec/codec_files.hpp"
#include "pianolm/codec/spectral.hpp"
#include "pianolm/lm/train.hpp"
#include "workspace.hpp"

namespace pianolm::cli {

struct ClipRecord {
  std::string id;
  fs::path audio;
  fs::path midi;
  fs::path tokens;
  double seconds = 0.0;
};

struct PreparedRun {
  fs::path dir;
  std::uint64_t digest = 0;
  std::vector<ClipRecord> clips;
};

struct CodecRun {
  fs::path dir;
  std::uint64_t digest = 0;
  std::uint64_t prepare_digest = 0;
  codec::RvqCodebooks codebooks;
  codec::SpectralConfig spectral;
};

PreparedRun load_prepared(const fs::path& dir);
CodecRun load_codec_run(const fs::path& dir);
/// Codec indices for one clip of a codec run, checked against the run digest.
codec::CodecMatrix load_clip_codes(const CodecRun& run, const std::string& clip_id);

std::string digest_comment(const std::string& stage, std::uint64_t digest);
Waveform read_wave(const fs::path& path);

}  // namespace pianolm::cli
