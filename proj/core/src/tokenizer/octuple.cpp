#include "pianolm/tokenizer/octuple.hpp"

#include <algorithm>
#include <cmath>

#include "pianolm/error.hpp"

namespace pianolm::tokenizer {

int TokenizerConfig::payload_bins(int stream) const {
  switch (stream) {
    case kPitch: return pitch_bins;
    case kVelocity: return velocity_bins;
    case kDuration: return duration_bins;
    case kIoi: return ioi_bins;
    case kPosition: return position_bins;
    case kBar: return bar_bins;
    default: throw InvalidArgument("stream index out of range: " + std::to_string(stream));
  }
}

std::array<int, kStreams> TokenizerConfig::vocab_sizes() const {
  std::array<int, kStreams> out{};
  for (int s = 0; s < kStreams; ++s) out[static_cast<std::size_t>(s)] = vocab_size(s);
  return out;
}

std::array<int, kStreams> OctupleSequence::row(std::size_t r) const {
  std::array<int, kStreams> out{};
  for (int s = 0; s < kStreams; ++s) out[static_cast<std::size_t>(s)] = at(r, s);
  return out;
}

void OctupleSequence::push_row(const std::array<int, kStreams>& tokens) {
  for (int s = 0; s < kStreams; ++s)
    streams_[static_cast<std::size_t>(s)].push_back(tokens[static_cast<std::size_t>(s)]);
}

namespace {

std::array<int, kStreams> special_row(const TokenizerConfig& cfg, Special which) {
  std::array<int, kStreams> row{};
  for (int s = 0; s < kStreams; ++s) row[static_cast<std::size_t>(s)] = cfg.special(s, which);
  return row;
}

int clip_bin(long long v, int bins) { return static_cast<int>(std::clamp<long long>(v, 0, bins - 1)); }

}  // namespace

OctupleSequence tokenize(const NoteSequence& notes, const TokenizerConfig& cfg) {
  OctupleSequence out;
  out.push_row(special_row(cfg, Special::Bos));
  const double bar_units = cfg.pseudo_bar_seconds / cfg.position_bins;
  long long prev_tick = 0;
  for (const auto& n : notes.notes) {
    // IOI between quantised onsets
    const long long onset_tick = std::llround(n.onset / cfg.ioi_tick);
    const long long total_pos = std::llround(n.onset / bar_units);
    std::array<int, kStreams> row{};
    row[kPitch] = clip_bin(n.pitch - kLowestPianoPitch, cfg.pitch_bins);
    row[kVelocity] = clip_bin((n.velocity - 1) / 2, cfg.velocity_bins);
    row[kDuration] = clip_bin(std::llround(n.duration / cfg.duration_tick), cfg.duration_bins);
    row[kIoi] = clip_bin(onset_tick - prev_tick, cfg.ioi_bins);
    row[kPosition] = static_cast<int>(total_pos % cfg.position_bins);
    row[kBar] = clip_bin(total_pos / cfg.position_bins, cfg.bar_bins);
    out.push_row(row);
    prev_tick = onset_tick;
  }
  out.push_row(special_row(cfg, Special::Eos));
  return out;
}

void check_vocab(const OctupleSequence& seq, const TokenizerConfig& cfg) {
  for (int s = 0; s < kStreams; ++s) {
    const auto v = cfg.vocab_size(s);
    for (std::size_t r = 0; r < seq.length(); ++r) {
      const auto t = seq.at(r, s);
      if (t < 0 || t >= v)
        throw InvalidArgument("token " + std::to_string(t) + " out of range for stream " +
                              kStreamNames[static_cast<std::size_t>(s)] + " (vocab " + std::to_string(v) +
                              ") at row " + std::to_string(r));
    }
  }
}

NoteSequence detokenize(const OctupleSequence& seq, const TokenizerConfig& cfg) {
  check_vocab(seq, cfg);
  const auto n = seq.length();
  if (n < 2) throw StructureError("token sequence shorter than BOS+EOS framing");
  for (int s = 0; s < kStreams; ++s) {
    if (seq.at(0, s) != cfg.special(s, Special::Bos))
      throw StructureError("row 0 is not a BOS row (stream " + std::string(kStreamNames[static_cast<std::size_t>(s)]) + ")");
    if (seq.at(n - 1, s) != cfg.special(s, Special::Eos))
      throw StructureError("row " + std::to_string(n - 1) + " is not an EOS row (stream " +
                           std::string(kStreamNames[static_cast<std::size_t>(s)]) + ")");
  }

  NoteSequence out;
  long long tick = 0;
  for (std::size_t r = 1; r + 1 < n; ++r) {
    for (int s = 0; s < kStreams; ++s)
      if (cfg.is_special(s, seq.at(r, s)))
        throw StructureError("special token in interior row " + std::to_string(r) + " (stream " +
                             std::string(kStreamNames[static_cast<std::size_t>(s)]) + ")");
    tick += seq.at(r, kIoi);
    Note note;
    note.pitch = seq.at(r, kPitch) + kLowestPianoPitch;
    note.velocity = seq.at(r, kVelocity) * 2 + 1;
    note.onset = static_cast<double>(tick) * cfg.ioi_tick;
    const int dur = seq.at(r, kDuration);
    // The zero bin stands for durations under half a tick.
    note.duration = dur == 0 ? 0.5 * cfg.duration_tick : dur * cfg.duration_tick;
    out.notes.push_back(note);
  }
  out.sort();
  return out;
}

PromptedTokens concat_prompt_detailed(const NoteSequence& prompt_midi, const NoteSequence& target_midi,
                                      double prompt_seconds, PromptCut mode, const TokenizerConfig& cfg) {
  if (!(prompt_seconds > 0.0)) throw InvalidArgument("prompt_seconds must be positive");
  if (target_midi.empty()) throw InvalidArgument("empty target: nothing to synthesize");

  std::vector<Note> prompt;
  for (const auto& n : prompt_midi.notes)
    if (n.onset < prompt_seconds) prompt.push_back(n);

  double cut = prompt_seconds;
  if (mode == PromptCut::NoteBoundary) {
    double best = -1.0;
    for (const auto& n : prompt)
      if (n.offset() <= prompt_seconds) best = std::max(best, n.offset());
    if (best > 0.0) {
      cut = best;
      std::erase_if(prompt, [cut](const Note& n) { return n.offset() > cut; });
    }
  }
  for (auto& n : prompt) n.duration = std::min(n.duration, cut - n.onset);
  std::erase_if(prompt, [](const Note& n) { return !(n.duration > 0.0); });

  PromptedTokens out;
  out.prompt_seconds = prompt.empty() ? 0.0 : cut;
  out.prompt_notes = prompt.size();

  NoteSequence joined;
  joined.source_id = target_midi.source_id;
  joined.notes = std::move(prompt);
  for (auto n : target_midi.notes) {
    n.onset += out.prompt_seconds;
    joined.notes.push_back(n);
  }
  joined.sort();
  out.tokens = tokenize(joined, cfg);
  return out;
}

OctupleSequence concat_prompt(const NoteSequence& prompt_midi, const NoteSequence& target_midi,
                              double prompt_seconds, PromptCut mode, const TokenizerConfig& cfg) {
  return concat_prompt_detailed(prompt_midi, target_midi, prompt_seconds, mode, cfg).tokens;
}

PromptCut parse_prompt_cut(const std::string& name) {
  if (name == "hard-cut") return PromptCut::HardCut;
  if (name == "note-boundary") return PromptCut::NoteBoundary;
  throw InvalidArgument("unknown prompt mode '" + name + "' (expected hard-cut or note-boundary)");
}

std::string to_string(PromptCut mode) {
  return mode == PromptCut::HardCut ? "hard-cut" : "note-boundary";
}

}  // namespace pianolm::tokenizer
