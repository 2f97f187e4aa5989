#include "synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "pianolm/binary_io.hpp"
#include "pianolm/midi_io/smf.hpp"
#include "pianolm/midi_io/wav.hpp"

namespace pianolm::cli {

namespace {

constexpr int kScale[] = {0, 2, 4, 5, 7, 9, 11};

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int scale_pitch(int degree) {
  const int octave = degree >= 0 ? degree / 7 : (degree - 6) / 7;
  return 60 + 12 * octave + kScale[degree - 7 * octave];
}

}  // namespace

Waveform render_notes(const NoteSequence& notes, double seconds) {
  Waveform out;
  const int sr = out.sample_rate;
  out.samples.assign(static_cast<std::size_t>(std::lround(seconds * sr)), 0.0f);
  std::vector<double> mix(out.samples.size(), 0.0);
  constexpr double kRelease = 0.05;
  for (const auto& n : notes.notes) {
    const double f0 = 440.0 * std::pow(2.0, (n.pitch - 69) / 12.0);
    const double amp = 0.15 * n.velocity / 127.0;
    const auto first = static_cast<std::size_t>(std::lround(n.onset * sr));
    const auto last = std::min(mix.size(), static_cast<std::size_t>(std::lround((n.offset() + kRelease) * sr)));
    for (std::size_t i = first; i < last; ++i) {
      const double t = static_cast<double>(i - first) / sr;
      double env = std::exp(-3.0 * t) * std::min(1.0, t / 0.005);
      const double past = t - n.duration;
      if (past > 0) env *= std::max(0.0, 1.0 - past / kRelease);
      double v = 0.0;
      for (int k = 1; k <= 6 && k * f0 < sr / 2.0; ++k) v += std::sin(2.0 * std::numbers::pi * k * f0 * t) / k;
      mix[i] += amp * env * v;
    }
  }
  double peak = 0.0;
  for (double v : mix) peak = std::max(peak, std::abs(v));
  const double gain = peak > 0.9 ? 0.9 / peak : 1.0;
  for (std::size_t i = 0; i < mix.size(); ++i) out.samples[i] = static_cast<float>(mix[i] * gain);
  return out;
}

std::vector<SyntheticPiece> synthetic_corpus(const SyntheticOptions& options) {
  std::vector<SyntheticPiece> out;
  for (int p = 0; p < options.pieces; ++p) {
    std::mt19937_64 rng(options.seed * 1000003ULL + static_cast<std::uint64_t>(p));
    SyntheticPiece piece;
    piece.name = "piece" + std::to_string(p);
    piece.midi.source_id = piece.name;
    int degree = static_cast<int>(rng() % 7);
    double t = uniform(rng, 0.05, 0.2);
    while (true) {
      const double dur = uniform(rng, 0.15, 0.6);
      if (t + dur > options.seconds - 0.1) break;
      const int velocity = 40 + static_cast<int>(rng() % 70);
      piece.midi.notes.push_back({scale_pitch(degree), velocity, t, dur});
      if (rng() % 4 == 0) piece.midi.notes.push_back({scale_pitch(degree - 7), velocity - 10, t, dur});
      degree = std::clamp(degree + static_cast<int>(rng() % 5) - 2, -7, 10);
      t += uniform(rng, 0.12, 0.45);
    }
    piece.midi.sort();
    piece.audio = render_notes(piece.midi, options.seconds);
    out.push_back(std::move(piece));
  }
  return out;
}

void write_synthetic_corpus(const std::filesystem::path& dir, const SyntheticOptions& options) {
  for (const auto& piece : synthetic_corpus(options)) {
    write_file(dir / "midi" / (piece.name + ".mid"), midi_io::write_smf(piece.midi));
    write_file(dir / "audio" / (piece.name + ".wav"), midi_io::write_wav(piece.audio));
  }
}

}  // namespace pianolm::cli
