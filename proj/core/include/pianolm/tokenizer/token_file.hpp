#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "pianolm/binary_io.hpp"
#include "pianolm/tokenizer/octuple.hpp"

namespace pianolm::tokenizer {

/// "OCT1" | N | six vocab sizes | six little-endian int32 streams of length N,
/// optionally followed by a "DGST" trailer carrying the producing config digest.
Bytes encode_token_file(const OctupleSequence& seq, const TokenizerConfig& cfg,
                        std::optional<std::uint64_t> digest = std::nullopt);

struct TokenFile {
  OctupleSequence tokens;
  std::array<int, kStreams> vocab_sizes{};
  std::optional<std::uint64_t> digest;
};

TokenFile decode_token_file(std::span<const std::uint8_t> bytes);

/// Human-readable JSON dump: {"vocab_sizes": {...}, "rows": [{"pitch": .., ...}, ...]}.
std::string token_json(const OctupleSequence& seq, const TokenizerConfig& cfg);

}  // namespace pianolm::tokenizer
