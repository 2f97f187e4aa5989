#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>

#include "artifacts.hpp"
#include "commands.hpp"
#include "parallel.hpp"
#include "pianolm/binary_io.hpp"
#include "pianolm/digest.hpp"
#include "pianolm/midi_io/segment.hpp"
#include "pianolm/midi_io/smf.hpp"
#include "pianolm/midi_io/wav.hpp"
#include "pianolm/tokenizer/token_file.hpp"

namespace pianolm::cli {

namespace {

using nlohmann::ordered_json;

struct Source {
  std::string name;
  fs::path midi;
  fs::path audio;
};

std::vector<Source> pair_sources(const fs::path& midi_dir, const fs::path& audio_dir) {
  if (!fs::is_directory(midi_dir)) throw UsageError("MIDI directory " + midi_dir.string() + " does not exist");
  if (!fs::is_directory(audio_dir)) throw UsageError("audio directory " + audio_dir.string() + " does not exist");
  std::vector<Source> out;
  for (const auto& e : fs::directory_iterator(midi_dir)) {
    const auto ext = e.path().extension().string();
    if (!e.is_regular_file() || (ext != ".mid" && ext != ".midi")) continue;
    const auto stem = e.path().stem().string();
    const auto wav = audio_dir / (stem + ".wav");
    if (!fs::exists(wav)) throw UsageError("no audio for " + e.path().filename().string() + " (expected " + wav.string() + ")");
    out.push_back({stem, e.path(), wav});
  }
  if (out.empty()) throw UsageError("no .mid files in " + midi_dir.string());
  std::sort(out.begin(), out.end(), [](const Source& a, const Source& b) { return a.name < b.name; });
  return out;
}

std::string clip_id(const std::string& source, int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "_%03d", index);
  return source + buf;
}

bool outputs_exist(const fs::path& dir, const ordered_json& entry) {
  for (const auto& c : entry.at("clips"))
    for (const char* key : {"audio", "midi", "tokens"})
      if (!fs::exists(dir / c.at(key).get<std::string>())) return false;
  return true;
}

ordered_json process(const Source& src, std::uint64_t source_digest, const PipelineConfig& cfg, const fs::path& dir,
                     std::uint64_t digest) {
  midi_io::SmfDiagnostics diag;
  const auto notes = midi_io::parse_smf(read_file(src.midi), &diag);
  const auto audio = midi_io::ingest_audio(read_file(src.audio));
  auto seg = cfg.segment;
  seg.seed = cfg.segment.seed ^ fnv1a64(src.name);
  midi_io::SegmentStats stats;
  const auto clips = midi_io::segment(notes, audio, seg, &stats);

  ordered_json entry;
  entry["name"] = src.name;
  entry["source_digest"] = digest_hex(source_digest);
  entry["smf"] = {{"format", diag.format},
                  {"tracks", diag.tracks},
                  {"dropped_out_of_range", diag.dropped_out_of_range},
                  {"unterminated_notes", diag.unterminated_notes},
                  {"dropped_controllers", diag.dropped_controllers},
                  {"retriggered_notes", diag.retriggered_notes}};
  entry["segment"] = {{"split_notes", stats.split_notes},
                      {"dropped_fragments", stats.dropped_fragments},
                      {"dropped_duration", stats.dropped_duration}};
  entry["clips"] = ordered_json::array();
  const auto comment = digest_comment("prepare", digest);
  for (const auto& clip : clips) {
    const auto id = clip_id(src.name, clip.clip_index);
    const std::string wav = "clips/" + id + ".wav", mid = "clips/" + id + ".mid", oct = "clips/" + id + ".oct";
    write_file(dir / wav, midi_io::write_wav(clip.audio, midi_io::WavEncoding::Float32, comment));
    write_file(dir / mid, midi_io::write_smf(clip.midi));
    write_file(dir / oct, tokenizer::encode_token_file(tokenizer::tokenize(clip.midi, cfg.tokenizer), cfg.tokenizer, digest));
    entry["clips"].push_back({{"id", id},
                              {"source_id", src.name},
                              {"clip_index", clip.clip_index},
                              {"audio", wav},
                              {"midi", mid},
                              {"tokens", oct},
                              {"start", clip.clip_start},
                              {"seconds", clip.clip_length},
                              {"notes", clip.midi.size()}});
  }
  return entry;
}

}  // namespace

int cmd_prepare(const Common& common, const PrepareArgs& args, std::ostream& out) {
  std::vector<std::string> overrides = common.overrides;
  if (!args.midi_dir.empty()) overrides.push_back("paths.midi_dir=" + nlohmann::json(args.midi_dir).dump());
  if (!args.audio_dir.empty()) overrides.push_back("paths.audio_dir=" + nlohmann::json(args.audio_dir).dump());
  Common resolved = common;
  resolved.overrides = overrides;
  const auto cfg = resolved.resolve();
  if (cfg.paths.midi_dir.empty() || cfg.paths.audio_dir.empty())
    throw UsageError("prepare needs --midi-dir and --audio-dir (or paths.* in the config)");

  const auto sources = pair_sources(cfg.paths.midi_dir, cfg.paths.audio_dir);
  const auto digest = cfg.prepare_digest();
  fs::path dir;
  if (!common.run_dir.empty()) {
    dir = make_run_dir(cfg.paths.work_dir, "prepare", digest, common.run_dir);
  } else if (auto existing = latest_run(cfg.paths.work_dir, "prepare", digest)) {
    dir = *existing;
  } else {
    dir = make_run_dir(cfg.paths.work_dir, "prepare", digest, "");
  }

  std::map<std::string, ordered_json> previous;
  if (fs::exists(dir / "manifest.json")) {
    const auto m = read_json(dir / "manifest.json");
    if (m.value("digest", "") == digest_hex(digest))
      for (const auto& s : m.at("sources")) previous[s.at("name").get<std::string>()] = s;
  }

  std::vector<ordered_json> entries(sources.size());
  std::vector<char> reused(sources.size(), 0);
  parallel_for(sources.size(), cfg.jobs, [&](std::size_t i) {
    const auto& src = sources[i];
    const auto midi_bytes = read_file(src.midi);
    const auto audio_bytes = read_file(src.audio);
    const auto source_digest =
        fnv1a64(std::string_view(reinterpret_cast<const char*>(audio_bytes.data()), audio_bytes.size()),
                fnv1a64(std::string_view(reinterpret_cast<const char*>(midi_bytes.data()), midi_bytes.size())));
    const auto it = previous.find(src.name);
    if (it != previous.end() && it->second.value("source_digest", "") == digest_hex(source_digest) &&
        outputs_exist(dir, it->second)) {
      entries[i] = it->second;
      reused[i] = 1;
      return;
    }
    entries[i] = process(src, source_digest, cfg, dir, digest);
  });

  ordered_json manifest;
  manifest["stage"] = "prepare";
  manifest["digest"] = digest_hex(digest);
  manifest["config"] = cfg.to_json();
  manifest["sources"] = ordered_json::array();
  manifest["clips"] = ordered_json::array();
  std::size_t skipped = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    skipped += static_cast<std::size_t>(reused[i]);
    for (const auto& c : entries[i].at("clips")) manifest["clips"].push_back(c);
    manifest["sources"].push_back(entries[i]);
  }
  std::string lines;
  for (const auto& c : manifest["clips"])
    lines += ordered_json{{"source_id", c.at("source_id")},
                          {"clip_index", c.at("clip_index")},
                          {"clip_start", c.at("start")},
                          {"clip_length", c.at("seconds")},
                          {"midi_path", c.at("midi")},
                          {"audio_path", c.at("audio")}}
                 .dump() +
             "\n";
  write_text(dir / "clips.jsonl", lines);
  write_json(dir / "manifest.json", manifest);
  out << "prepared " << manifest["clips"].size() << " clips from " << sources.size() << " sources (" << skipped
      << " unchanged) in " << dir.string() << "\n";
  return 0;
}

}  // namespace pianolm::cli
