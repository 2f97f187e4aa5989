#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "pianolm/binary_io.hpp"
#include "pianolm/codec/rvq.hpp"

namespace pianolm::codec {

/// "RVQ1" | L | K | D | L*K*D float32 centroids, then an optional "META"
/// trailer (config digest, per-level iterations and distortion).
Bytes encode_codebook_file(const RvqCodebooks& codebooks, std::optional<std::uint64_t> digest = std::nullopt);

struct CodebookFile {
  RvqCodebooks codebooks;
  std::optional<std::uint64_t> digest;
};
CodebookFile decode_codebook_file(std::span<const std::uint8_t> bytes);

/// "CODX" | T | L | K | T*L int32 indices (frame-major), then an optional "DGST" trailer.
Bytes encode_codec_file(const CodecMatrix& codes, std::optional<std::uint64_t> digest = std::nullopt);

struct CodecFile {
  CodecMatrix codes;
  std::optional<std::uint64_t> digest;
};
CodecFile decode_codec_file(std::span<const std::uint8_t> bytes);

}  // namespace pianolm::codec
