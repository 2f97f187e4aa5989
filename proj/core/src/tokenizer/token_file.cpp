#include "pianolm/tokenizer/token_file.hpp"

#include "json.hpp"

#include "pianolm/error.hpp"

namespace pianolm::tokenizer {

Bytes encode_token_file(const OctupleSequence& seq, const TokenizerConfig& cfg,
                        std::optional<std::uint64_t> digest) {
  check_vocab(seq, cfg);
  ByteWriter w;
  w.magic("OCT1");
  w.u32(static_cast<std::uint32_t>(seq.length()));
  for (int v : cfg.vocab_sizes()) w.u32(static_cast<std::uint32_t>(v));
  for (int s = 0; s < kStreams; ++s)
    for (auto t : seq.stream(s)) w.i32(t);
  if (digest) {
    w.magic("DGST");
    w.u64(*digest);
  }
  return w.take();
}

TokenFile decode_token_file(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic("OCT1");
  const auto n = r.u32();
  TokenFile out;
  for (auto& v : out.vocab_sizes) v = static_cast<int>(r.u32());
  if (static_cast<std::uint64_t>(n) * kStreams * 4 > r.remaining())
    throw ParseError("token streams truncated for N=" + std::to_string(n), r.offset());
  out.tokens = OctupleSequence(n);
  for (int s = 0; s < kStreams; ++s) {
    const auto vocab = out.vocab_sizes[static_cast<std::size_t>(s)];
    for (std::uint32_t i = 0; i < n; ++i) {
      const auto at = r.offset();
      const auto t = r.i32();
      if (t < 0 || t >= vocab) throw ParseError("token outside declared vocabulary", at);
      out.tokens.set(i, s, t);
    }
  }
  if (r.peek_magic("DGST")) {
    r.expect_magic("DGST");
    out.digest = r.u64();
  }
  if (!r.at_end()) throw ParseError("trailing bytes after token streams", r.offset());
  return out;
}

std::string token_json(const OctupleSequence& seq, const TokenizerConfig& cfg) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json vocab;
  for (int s = 0; s < kStreams; ++s) vocab[kStreamNames[static_cast<std::size_t>(s)]] = cfg.vocab_size(s);
  j["vocab_sizes"] = vocab;
  j["length"] = seq.length();
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < seq.length(); ++r) {
    nlohmann::ordered_json row;
    for (int s = 0; s < kStreams; ++s) row[kStreamNames[static_cast<std::size_t>(s)]] = seq.at(r, s);
    rows.push_back(row);
  }
  j["rows"] = rows;
  return j.dump(2);
}

}  // namespace pianolm::tokenizer
