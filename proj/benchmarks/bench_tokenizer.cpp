#include <random>

#include <benchmark/benchmark.h>

#include "pianolm/midi_io/smf.hpp"
#include "pianolm/tokenizer/octuple.hpp"

using namespace pianolm;

namespace {

NoteSequence performance(int notes) {
  std::mt19937_64 rng(3);
  NoteSequence ns;
  double t = 0.0;
  for (int i = 0; i < notes; ++i) {
    ns.notes.push_back({static_cast<int>(21 + rng() % 88), static_cast<int>(1 + rng() % 127), t,
                        0.05 + static_cast<double>(rng() % 200) / 100.0});
    t += static_cast<double>(rng() % 30) / 100.0;
  }
  ns.sort();
  return ns;
}

void BM_Tokenize(benchmark::State& state) {
  const auto ns = performance(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(tokenizer::detokenize(tokenizer::tokenize(ns)));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Tokenize)->Arg(1000)->Arg(10000);

void BM_SmfRoundTrip(benchmark::State& state) {
  const auto bytes = midi_io::write_smf(performance(static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(midi_io::parse_smf(bytes));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(bytes.size()));
}
BENCHMARK(BM_SmfRoundTrip)->Arg(1000)->Arg(10000);

}  // namespace
