#include "pianolm/codec/codec_files.hpp"

#include <bit>

#include "pianolm/error.hpp"

namespace pianolm::codec {

Bytes encode_codebook_file(const RvqCodebooks& codebooks, std::optional<std::uint64_t> digest) {
  ByteWriter w;
  w.magic("RVQ1");
  w.u32(static_cast<std::uint32_t>(codebooks.level_count()));
  w.u32(static_cast<std::uint32_t>(codebooks.codebook_size()));
  w.u32(static_cast<std::uint32_t>(codebooks.dim()));
  for (const auto& cb : codebooks.levels)
    for (Eigen::Index i = 0; i < cb.size(); ++i) w.f32(cb.data()[i]);
  w.magic("META");
  w.u64(digest.value_or(0));
  w.u32(digest ? 1 : 0);
  for (int l = 0; l < codebooks.level_count(); ++l) {
    const auto s = l < static_cast<int>(codebooks.stats.size()) ? codebooks.stats[static_cast<std::size_t>(l)]
                                                                : RvqLevelStats{};
    w.u32(static_cast<std::uint32_t>(s.iterations));
    w.u64(std::bit_cast<std::uint64_t>(s.distortion));
  }
  return w.take();
}

CodebookFile decode_codebook_file(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic("RVQ1");
  const auto dims_at = r.offset();
  const auto levels = r.u32();
  const auto k = r.u32();
  const auto d = r.u32();
  if (levels == 0 || k == 0 || d == 0) throw ParseError("codebook header has a zero dimension", dims_at);
  if (static_cast<std::uint64_t>(levels) * k * d * 4 > r.remaining())
    throw ParseError("centroid data truncated", r.offset());
  CodebookFile out;
  for (std::uint32_t l = 0; l < levels; ++l) {
    RowMatrixXf cb(k, d);
    for (Eigen::Index i = 0; i < cb.size(); ++i) cb.data()[i] = r.f32();
    out.codebooks.levels.push_back(std::move(cb));
  }
  out.codebooks.stats.resize(levels);
  if (r.peek_magic("META")) {
    r.expect_magic("META");
    const auto digest = r.u64();
    if (r.u32() != 0) out.digest = digest;
    for (auto& s : out.codebooks.stats) {
      s.iterations = static_cast<int>(r.u32());
      s.distortion = std::bit_cast<double>(r.u64());
    }
  }
  if (!r.at_end()) throw ParseError("trailing bytes after codebook", r.offset());
  return out;
}

Bytes encode_codec_file(const CodecMatrix& codes, std::optional<std::uint64_t> digest) {
  ByteWriter w;
  w.magic("CODX");
  w.u32(static_cast<std::uint32_t>(codes.frames()));
  w.u32(static_cast<std::uint32_t>(codes.levels()));
  w.u32(static_cast<std::uint32_t>(codes.codebook_size()));
  for (auto v : codes.data()) w.i32(v);
  if (digest) {
    w.magic("DGST");
    w.u64(*digest);
  }
  return w.take();
}

CodecFile decode_codec_file(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic("CODX");
  const auto t = r.u32();
  const auto levels = r.u32();
  const auto k = r.u32();
  if (static_cast<std::uint64_t>(t) * levels * 4 > r.remaining()) throw ParseError("codec data truncated", r.offset());
  CodecFile out;
  out.codes = CodecMatrix(t, static_cast<int>(levels), static_cast<int>(k));
  for (std::uint32_t f = 0; f < t; ++f) {
    for (std::uint32_t l = 0; l < levels; ++l) {
      const auto at = r.offset();
      const auto v = r.i32();
      if (v < 0 || static_cast<std::uint32_t>(v) >= k) throw ParseError("codec index outside [0, K)", at);
      out.codes.set(f, static_cast<int>(l), v);
    }
  }
  if (r.peek_magic("DGST")) {
    r.expect_magic("DGST");
    out.digest = r.u64();
  }
  if (!r.at_end()) throw ParseError("trailing bytes after codec matrix", r.offset());
  return out;
}

}  // namespace pianolm::codec
