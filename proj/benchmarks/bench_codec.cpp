#include <cmath>
#include <random>

#include <benchmark/benchmark.h>

#include "pianolm/codec/rvq.hpp"
#include "pianolm/codec/spectral.hpp"

using namespace pianolm;

namespace {

Waveform noise(double seconds) {
  Waveform w;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> u(-0.3f, 0.3f);
  w.samples.resize(static_cast<std::size_t>(seconds * w.sample_rate));
  for (auto& s : w.samples) s = u(rng);
  return w;
}

void BM_LogMelFeatures(benchmark::State& state) {
  const codec::SpectralFrontend fe;
  const auto w = noise(static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fe.features(w));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.samples.size()));
}
BENCHMARK(BM_LogMelFeatures)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_GriffinLim(benchmark::State& state) {
  const codec::SpectralFrontend fe;
  const auto f = fe.features(noise(1.0));
  for (auto _ : state) benchmark::DoNotOptimize(fe.synthesize(f, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_GriffinLim)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_RvqEncode(benchmark::State& state) {
  const codec::SpectralFrontend fe;
  const auto f = fe.features(noise(10.0));
  codec::RvqTrainOptions opts;
  opts.codebook_size = static_cast<int>(state.range(0));
  opts.max_iterations = 5;
  const auto cb = codec::train_rvq({f}, opts);
  for (auto _ : state) benchmark::DoNotOptimize(codec::rvq_encode(f, cb));
  state.SetItemsProcessed(state.iterations() * f.length());
}
BENCHMARK(BM_RvqEncode)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace
