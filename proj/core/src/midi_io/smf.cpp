#include "pianolm/midi_io/smf.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "pianolm/error.hpp"

namespace pianolm {

double NoteSequence::end_time() const noexcept {
  double end = 0.0;
  for (const auto& n : notes) end = std::max(end, n.offset());
  return end;
}

void NoteSequence::sort() { std::stable_sort(notes.begin(), notes.end(), canonical_less); }

void NoteSequence::validate() const {
  for (std::size_t i = 0; i < notes.size(); ++i) {
    const auto& n = notes[i];
    const auto where = " at note " + std::to_string(i);
    if (n.pitch < kLowestPianoPitch || n.pitch > kHighestPianoPitch)
      throw InvalidArgument("pitch " + std::to_string(n.pitch) + " outside 21..108" + where);
    if (n.velocity < 1 || n.velocity > 127)
      throw InvalidArgument("velocity " + std::to_string(n.velocity) + " outside 1..127" + where);
    if (!(n.onset >= 0.0) || !std::isfinite(n.onset)) throw InvalidArgument("negative onset" + where);
    if (!(n.duration > 0.0) || !std::isfinite(n.duration))
      throw InvalidArgument("non-positive duration" + where);
    if (i > 0 && canonical_less(n, notes[i - 1]))
      throw InvalidArgument("notes not in canonical order" + where);
  }
}

namespace midi_io {
namespace {

enum class EventKind : int { Tempo = 0, NoteOff = 1, NoteOn = 2 };

struct TrackEvent {
  std::uint64_t tick = 0;
  EventKind kind = EventKind::NoteOn;
  int pitch = 0;
  int velocity = 0;
  std::uint32_t tempo = 0;  // microseconds per quarter note
  int track = 0;
};

bool event_less(const TrackEvent& a, const TrackEvent& b) {
  if (a.tick != b.tick) return a.tick < b.tick;
  if (a.kind != b.kind) return a.kind < b.kind;
  if (a.pitch != b.pitch) return a.pitch < b.pitch;
  if (a.tempo != b.tempo) return a.tempo < b.tempo;
  if (a.velocity != b.velocity) return a.velocity < b.velocity;
  return a.track < b.track;
}

std::uint32_t read_be(ByteReader& r, int n) {
  std::uint32_t v = 0;
  for (auto c : r.bytes(static_cast<std::size_t>(n))) v = (v << 8) | c;
  return v;
}

std::uint32_t read_vlq(ByteReader& r) {
  const auto start = r.offset();
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    const auto c = r.bytes(1)[0];
    v = (v << 7) | (c & 0x7f);
    if ((c & 0x80) == 0) return v;
  }
  throw ParseError("variable-length quantity longer than 4 bytes", start);
}

std::uint8_t data_byte(ByteReader& r) {
  const auto at = r.offset();
  const auto c = r.bytes(1)[0];
  if (c & 0x80) throw ParseError("status byte where data byte expected", at);
  return c;
}

int data_length(std::uint8_t status) {
  switch (status & 0xf0) {
    case 0xc0:
    case 0xd0:
      return 1;
    default:
      return 2;
  }
}

/// Returns the tick of the track's end (end-of-track meta or last event).
std::uint64_t parse_track(std::span<const std::uint8_t> body, std::size_t base, int track,
                          std::vector<TrackEvent>& out, SmfDiagnostics& diag) {
  ByteReader r(body);
  std::uint64_t tick = 0;
  std::uint8_t running = 0;
  try {
    while (!r.at_end()) {
      tick += read_vlq(r);
      const auto status_at = r.offset();
      const std::uint8_t lead = r.bytes(1)[0];

      if (lead == 0xff) {
        const auto type = r.bytes(1)[0];
        const auto len = read_vlq(r);
        const auto body_at = r.offset();
        auto meta = r.bytes(len);
        if (type == 0x51) {
          if (len != 3) throw ParseError("tempo meta event must have length 3", body_at);
          TrackEvent ev;
          ev.tick = tick;
          ev.kind = EventKind::Tempo;
          ev.tempo = (std::uint32_t{meta[0]} << 16) | (std::uint32_t{meta[1]} << 8) | meta[2];
          ev.track = track;
          if (ev.tempo == 0) throw ParseError("zero tempo", body_at);
          out.push_back(ev);
        } else if (type == 0x2f) {
          return tick;
        }
        running = 0;
        continue;
      }
      if (lead == 0xf0 || lead == 0xf7) {
        r.bytes(read_vlq(r));
        running = 0;
        continue;
      }
      if (lead > 0xf0) throw ParseError("unexpected system message in track data", status_at);

      std::uint8_t status;
      std::uint8_t d0;
      if (lead & 0x80) {
        status = lead;
        d0 = data_byte(r);
      } else {
        if (running == 0) throw ParseError("running status without a previous status byte", status_at);
        status = running;
        d0 = lead;
      }
      running = status;
      const std::uint8_t d1 = data_length(status) == 2 ? data_byte(r) : 0;

      const auto type = status & 0xf0;
      if (type == 0x80 || type == 0x90) {
        TrackEvent ev;
        ev.tick = tick;
        ev.pitch = d0;
        ev.velocity = d1;
        ev.track = track;
        ev.kind = (type == 0x90 && d1 > 0) ? EventKind::NoteOn : EventKind::NoteOff;
        out.push_back(ev);
      } else if (type == 0xb0) {
        ++diag.dropped_controllers;
      }
    }
  } catch (const ParseError& e) {
    // rebase the offset from the chunk body to the whole file
    std::string what = e.what();
    what = what.substr(0, what.rfind(" (at byte offset"));
    throw ParseError(what, base + e.offset());
  }
  return tick;
}

class TempoMap {
public:
  TempoMap(std::vector<TrackEvent> tempos, double seconds_per_tick_smpte, int ppq)
      : smpte_(seconds_per_tick_smpte), ppq_(ppq) {
    std::uint64_t prev_tick = 0;
    double prev_sec = 0.0;
    std::uint32_t tempo = 500000;
    segments_.push_back({0, 0.0, tempo});
    for (const auto& t : tempos) {
      prev_sec += seconds_for(t.tick - prev_tick, tempo);
      prev_tick = t.tick;
      tempo = t.tempo;
      if (segments_.back().tick == t.tick)
        segments_.back() = {t.tick, prev_sec, tempo};
      else
        segments_.push_back({t.tick, prev_sec, tempo});
    }
  }

  double seconds(std::uint64_t tick) const {
    if (smpte_ > 0.0) return static_cast<double>(tick) * smpte_;
    auto it = std::upper_bound(segments_.begin(), segments_.end(), tick,
                               [](std::uint64_t t, const Segment& s) { return t < s.tick; });
    --it;
    return it->seconds + seconds_for(tick - it->tick, it->tempo);
  }

private:
  struct Segment {
    std::uint64_t tick;
    double seconds;
    std::uint32_t tempo;
  };

  double seconds_for(std::uint64_t ticks, std::uint32_t tempo) const {
    if (smpte_ > 0.0) return static_cast<double>(ticks) * smpte_;
    return static_cast<double>(ticks) * static_cast<double>(tempo) * 1e-6 / ppq_;
  }

  double smpte_;
  int ppq_;
  std::vector<Segment> segments_;
};

}  // namespace

NoteSequence parse_smf(std::span<const std::uint8_t> bytes, SmfDiagnostics* diagnostics) {
  SmfDiagnostics diag;
  ByteReader r(bytes);
  r.expect_magic("MThd");
  const auto header_len = read_be(r, 4);
  if (header_len < 6) throw ParseError("MThd chunk shorter than 6 bytes", r.offset() - 4);
  const auto format_at = r.offset();
  const auto format = read_be(r, 2);
  const auto ntracks = read_be(r, 2);
  const auto division_at = r.offset();
  const auto division = read_be(r, 2);
  r.bytes(header_len - 6);
  if (format == 2) throw ParseError("SMF format 2 is not supported", format_at);
  if (format > 2) throw ParseError("unknown SMF format " + std::to_string(format), format_at);
  if (format == 0 && ntracks != 1) throw ParseError("format 0 file must have exactly one track", format_at + 2);

  int ppq = 0;
  double smpte_seconds_per_tick = 0.0;
  if (division & 0x8000) {
    const int fps_code = -static_cast<std::int8_t>(division >> 8);
    const int ticks_per_frame = division & 0xff;
    const double fps = fps_code == 29 ? 29.97 : fps_code;
    if (fps <= 0 || ticks_per_frame == 0) throw ParseError("invalid SMPTE division", division_at);
    smpte_seconds_per_tick = 1.0 / (fps * ticks_per_frame);
  } else {
    ppq = static_cast<int>(division);
    if (ppq == 0) throw ParseError("zero ticks per quarter note", division_at);
  }
  diag.format = static_cast<int>(format);

  std::vector<TrackEvent> events;
  std::vector<std::uint64_t> track_end;
  while (!r.at_end()) {
    const auto chunk_at = r.offset();
    if (r.remaining() < 8) throw ParseError("truncated chunk header", chunk_at);
    auto id = r.bytes(4);
    const auto len = read_be(r, 4);
    if (len > r.remaining()) throw ParseError("chunk length exceeds file size", chunk_at + 4);
    const auto body_at = r.offset();
    auto body = r.bytes(len);
    if (std::string(id.begin(), id.end()) != "MTrk") continue;
    const int track = static_cast<int>(track_end.size());
    track_end.push_back(parse_track(body, body_at, track, events, diag));
  }
  if (track_end.size() < ntracks)
    throw ParseError("header declares " + std::to_string(ntracks) + " tracks, found " +
                         std::to_string(track_end.size()),
                     bytes.size());
  diag.tracks = static_cast<int>(track_end.size());

  std::stable_sort(events.begin(), events.end(), event_less);
  std::vector<TrackEvent> tempos;
  for (const auto& e : events)
    if (e.kind == EventKind::Tempo) tempos.push_back(e);
  const TempoMap tempo_map(std::move(tempos), smpte_seconds_per_tick, ppq);

  struct Open {
    std::uint64_t tick;
    int velocity;
    int track;
  };
  std::map<int, Open> active;
  NoteSequence out;
  auto close = [&](int pitch, const Open& open, std::uint64_t end_tick) {
    if (end_tick <= open.tick) return;
    const double on = tempo_map.seconds(open.tick);
    const double off = tempo_map.seconds(end_tick);
    out.notes.push_back({pitch, open.velocity, on, off - on});
  };

  for (const auto& e : events) {
    if (e.kind == EventKind::Tempo) continue;
    if (e.pitch < kLowestPianoPitch || e.pitch > kHighestPianoPitch) {
      if (e.kind == EventKind::NoteOn) ++diag.dropped_out_of_range;
      continue;
    }
    auto it = active.find(e.pitch);
    if (e.kind == EventKind::NoteOff) {
      if (it != active.end()) {
        close(e.pitch, it->second, e.tick);
        active.erase(it);
      }
      continue;
    }
    if (it != active.end()) {
      ++diag.retriggered_notes;
      close(e.pitch, it->second, e.tick);
      active.erase(it);
    }
    active.emplace(e.pitch, Open{e.tick, e.velocity, e.track});
  }
  for (const auto& [pitch, open] : active) {
    ++diag.unterminated_notes;
    close(pitch, open, std::max(track_end[static_cast<std::size_t>(open.track)], open.tick));
  }

  out.sort();
  if (diagnostics) *diagnostics = diag;
  return out;
}

Bytes write_smf(const NoteSequence& notes) {
  struct Ev {
    std::int64_t tick;
    int kind;  // 0 off, 1 on
    int pitch;
    int velocity;
  };
  std::vector<Ev> evs;
  for (const auto& n : notes.notes) {
    const auto on = static_cast<std::int64_t>(std::llround(n.onset * 1000.0));
    auto off = static_cast<std::int64_t>(std::llround(n.offset() * 1000.0));
    off = std::max(off, on + 1);
    evs.push_back({on, 1, n.pitch, n.velocity});
    evs.push_back({off, 0, n.pitch, 0});
  }
  std::stable_sort(evs.begin(), evs.end(), [](const Ev& a, const Ev& b) {
    if (a.tick != b.tick) return a.tick < b.tick;
    if (a.kind != b.kind) return a.kind < b.kind;
    return a.pitch < b.pitch;
  });

  Bytes track;
  auto vlq = [&track](std::uint32_t v) {
    std::uint8_t buf[4];
    int n = 0;
    buf[n++] = v & 0x7f;
    while ((v >>= 7) != 0) buf[n++] = static_cast<std::uint8_t>((v & 0x7f) | 0x80);
    while (n > 0) track.push_back(buf[--n]);
  };
  vlq(0);
  track.insert(track.end(), {0xff, 0x51, 0x03, 0x0f, 0x42, 0x40});  // 1 000 000 us
  std::int64_t prev = 0;
  for (const auto& e : evs) {
    vlq(static_cast<std::uint32_t>(e.tick - prev));
    prev = e.tick;
    if (e.kind == 1)
      track.insert(track.end(), {0x90, static_cast<std::uint8_t>(e.pitch), static_cast<std::uint8_t>(e.velocity)});
    else
      track.insert(track.end(), {0x80, static_cast<std::uint8_t>(e.pitch), 0x40});
  }
  vlq(0);
  track.insert(track.end(), {0xff, 0x2f, 0x00});

  Bytes out = {'M', 'T', 'h', 'd', 0, 0, 0, 6, 0, 0, 0, 1, 0x03, 0xe8};
  const auto len = static_cast<std::uint32_t>(track.size());
  out.insert(out.end(), {'M', 'T', 'r', 'k', static_cast<std::uint8_t>(len >> 24),
                         static_cast<std::uint8_t>(len >> 16), static_cast<std::uint8_t>(len >> 8),
                         static_cast<std::uint8_t>(len)});
  out.insert(out.end(), track.begin(), track.end());
  return out;
}

}  // namespace midi_io
}  // namespace pianolm
