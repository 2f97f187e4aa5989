#pragma once

#include <cstdint>
#include <span>

#include "pianolm/binary_io.hpp"
#include "pianolm/midi_io/types.hpp"

namespace pianolm::midi_io {

struct SmfDiagnostics {
  int format = 0;
  int tracks = 0;
  int dropped_out_of_range = 0;  // pitches outside 21..108
  int unterminated_notes = 0;    // note-on closed at end of track
  int dropped_controllers = 0;   // CC events, including sustain pedal
  int retriggered_notes = 0;     // same-pitch overlap closed at the later onset
};

/// Decodes a format 0 or 1 Standard MIDI File into notes in absolute seconds.
///
/// All tracks are merged onto a single tempo map. At equal ticks events are
/// processed in a canonical order (tempo, note-off, note-on by pitch), so the
/// result does not depend on how simultaneous events were serialised.
/// Controllers, including CC64, never influence note durations.
NoteSequence parse_smf(std::span<const std::uint8_t> bytes, SmfDiagnostics* diagnostics = nullptr);

/// Writes a single-track format 0 file at 1 ms per tick
/// (PPQ 1000, tempo 1 000 000 us per quarter note).
Bytes write_smf(const NoteSequence& notes);

}  // namespace pianolm::midi_io
