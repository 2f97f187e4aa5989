#include "artifacts.hpp"

#include "commands.hpp"
#include "pianolm/binary_io.hpp"
#include "pianolm/digest.hpp"
#include "pianolm/midi_io/wav.hpp"

namespace pianolm::cli {

PreparedRun load_prepared(const fs::path& dir) {
  const auto m = read_json(dir / "manifest.json");
  if (m.value("stage", "") != "prepare") throw UsageError(dir.string() + " is not a prepare run");
  PreparedRun run;
  run.dir = dir;
  run.digest = parse_digest_hex(m.at("digest").get<std::string>());
  for (const auto& c : m.at("clips")) {
    ClipRecord r;
    r.id = c.at("id").get<std::string>();
    r.audio = dir / c.at("audio").get<std::string>();
    r.midi = dir / c.at("midi").get<std::string>();
    r.tokens = dir / c.at("tokens").get<std::string>();
    r.seconds = c.at("seconds").get<double>();
    run.clips.push_back(std::move(r));
  }
  return run;
}

CodecRun load_codec_run(const fs::path& dir) {
  const auto m = read_json(dir / "manifest.json");
  if (m.value("stage", "") != "codec") throw UsageError(dir.string() + " is not a train-codec run");
  CodecRun run;
  run.dir = dir;
  run.digest = parse_digest_hex(m.at("digest").get<std::string>());
  run.prepare_digest = parse_digest_hex(m.at("prepare_digest").get<std::string>());
  auto file = codec::decode_codebook_file(read_file(dir / "codebook.rvq"));
  if (file.digest != run.digest) throw FormatError("codebook digest does not match its manifest in " + dir.string());
  run.codebooks = std::move(file.codebooks);
  run.spectral.mel_bands = m.at("mel_bands").get<int>();
  if (run.spectral.mel_bands != run.codebooks.dim())
    throw FormatError("codebook dimension differs from the recorded mel band count");
  return run;
}

codec::CodecMatrix load_clip_codes(const CodecRun& run, const std::string& clip_id) {
  auto file = codec::decode_codec_file(read_file(run.dir / "codes" / (clip_id + ".codx")));
  if (file.digest != run.digest) throw FormatError("codec file for " + clip_id + " was produced by another run");
  return std::move(file.codes);
}

std::string digest_comment(const std::string& stage, std::uint64_t digest) {
  return "pianolm " + stage + " digest " + digest_hex(digest);
}

Waveform read_wave(const fs::path& path) { return midi_io::ingest_audio(read_file(path)); }

}  // namespace pianolm::cli
