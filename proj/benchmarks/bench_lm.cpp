#include <random>

#include <benchmark/benchmark.h>

#include "pianolm/lm/generate.hpp"
#include "pianolm/lm/model.hpp"
#include "pianolm/lm/train.hpp"

using namespace pianolm;

namespace {

lm::TrainingPair make_pair(const lm::ModelConfig& cfg, int notes, int frames) {
  std::mt19937_64 rng(2);
  NoteSequence ns;
  for (int i = 0; i < notes; ++i)
    ns.notes.push_back({static_cast<int>(21 + rng() % 88), 80, 0.1 * i, 0.3});
  codec::CodecMatrix codes(frames, cfg.levels, cfg.codebook_size);
  for (int t = 0; t < frames; ++t)
    for (int l = 0; l < cfg.levels; ++l) codes.set(t, l, static_cast<std::int32_t>(rng() % static_cast<unsigned>(cfg.codebook_size)));
  return {tokenizer::tokenize(ns), codes, "bench"};
}

void BM_ArLoss(benchmark::State& state) {
  const lm::ModelConfig cfg;
  const auto params = lm::ModelParams<float>::initialize(cfg);
  const auto pair = make_pair(cfg, 40, static_cast<int>(state.range(0)));
  const auto level1 = lm::level1_with_eos(pair.codes, cfg);
  for (auto _ : state) benchmark::DoNotOptimize(lm::ar_loss(params, pair.midi, level1));
}
BENCHMARK(BM_ArLoss)->Arg(50)->Arg(250)->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
  const lm::ModelConfig cfg;
  auto params = lm::ModelParams<float>::initialize(cfg);
  auto opt = lm::OptimizerState::for_model(params);
  const std::vector<lm::TrainingPair> batch = {make_pair(cfg, 40, 250)};
  for (auto _ : state) benchmark::DoNotOptimize(lm::train_step(params, batch, opt, {}));
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond);

void BM_GenerateLevel1(benchmark::State& state) {
  const lm::ModelConfig cfg;
  const auto params = lm::ModelParams<float>::initialize(cfg);
  const auto pair = make_pair(cfg, 40, 1);
  lm::SamplingOptions sampling;
  sampling.greedy = true;
  const int frames = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(state.range(1) ? lm::generate_level1(params, pair.midi, {}, frames, sampling)
                                            : lm::generate_level1_uncached(params, pair.midi, {}, frames, sampling));
}
BENCHMARK(BM_GenerateLevel1)->ArgsProduct({{50}, {0, 1}})->ArgNames({"frames", "cached"})->Unit(benchmark::kMillisecond);

}  // namespace
