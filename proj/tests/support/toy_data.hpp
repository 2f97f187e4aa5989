#pragma once

#include <random>

#include "pianolm/codec/rvq.hpp"
#include "pianolm/lm/train.hpp"
#include "pianolm/tokenizer/octuple.hpp"

namespace pianolm::testing {

inline NoteSequence random_notes(std::mt19937_64& rng, int count) {
  NoteSequence ns;
  double t = 0.0;
  for (int i = 0; i < count; ++i) {
    ns.notes.push_back({static_cast<int>(21 + rng() % 88), static_cast<int>(1 + rng() % 127), t,
                        0.05 + static_cast<double>(rng() % 100) * 0.01});
    t += static_cast<double>(rng() % 50) * 0.01;
  }
  ns.sort();
  return ns;
}

inline codec::CodecMatrix random_codes(std::mt19937_64& rng, int frames, int levels, int k) {
  codec::CodecMatrix m(frames, levels, k);
  for (int f = 0; f < frames; ++f)
    for (int l = 0; l < levels; ++l) m.set(f, l, static_cast<std::int32_t>(rng() % static_cast<unsigned>(k)));
  return m;
}

/// MIDI and codec frames drawn independently; enough to exercise shapes and overfitting.
inline lm::TrainingPair random_pair(std::mt19937_64& rng, int notes, int frames, int levels, int k) {
  return {tokenizer::tokenize(random_notes(rng, notes)), random_codes(rng, frames, levels, k), "toy"};
}

}  // namespace pianolm::testing
