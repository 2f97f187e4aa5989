#include <cmath>
#include <random>

#include "network.hpp"
#include "pianolm/lm/model.hpp"
#include "pianolm/lm/train.hpp"

namespace pianolm::lm {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

OptimizerState OptimizerState::for_model(const ModelParams<float>& params) {
  return {ModelParams<float>::zeros_like(params.config), 0};
}

int sample_nar_level(const ModelConfig& config, std::uint64_t seed, std::uint64_t step) {
  if (config.levels < 2) return 0;
  const std::uint64_t r = splitmix(splitmix(seed) ^ step);
  return 2 + static_cast<int>(r % static_cast<std::uint64_t>(config.levels - 1));
}

NarSplit split_for_nar(const codec::CodecMatrix& codes, int prompt_frames) {
  const Eigen::Index p = std::min<Eigen::Index>(std::max(prompt_frames, 0), codes.frames() / 2);
  return {codes.slice(0, p), codes.slice(p, codes.frames())};
}

StepReport train_step(ModelParams<float>& params, std::span<const TrainingPair> batch, OptimizerState& state,
                      const TrainOptions& options) {
  if (batch.empty()) throw InvalidArgument("empty training batch");
  const auto& cfg = params.config;
  StepReport report;
  report.nar_level = options.nar_level > 0 ? options.nar_level : sample_nar_level(cfg, options.seed, state.step);

  auto grad = ModelParams<float>::zeros_like(cfg);
  const float scale = 1.0f / static_cast<float>(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& pair = batch[i];
    detail::Dropout dropout{cfg.dropout, std::mt19937_64(splitmix(options.seed ^ splitmix(state.step)) + i)};
    const auto level1 = level1_with_eos(pair.codes, cfg);
    const auto ar = detail::ar_objective<float>(params, pair.midi, level1, &grad, scale, &dropout);
    if (!std::isfinite(ar.loss))
      throw Error("non-finite AR loss on sample " + std::to_string(i) + " (" + pair.id + ") at step " +
                  std::to_string(state.step));
    report.ar_loss += ar.loss / static_cast<double>(batch.size());
    if (report.nar_level >= 2) {
      const auto split = split_for_nar(pair.codes, options.prompt_frames);
      const auto nar = detail::nar_objective<float>(params, pair.midi, split.target, split.prompt, report.nar_level,
                                                    &grad, scale, &dropout);
      if (!std::isfinite(nar.loss))
        throw Error("non-finite NAR loss on sample " + std::to_string(i) + " (" + pair.id + ") at step " +
                    std::to_string(state.step));
      report.nar_loss += nar.loss / static_cast<double>(batch.size());
    }
  }

  const auto lr = static_cast<float>(options.learning_rate);
  const auto mu = static_cast<float>(options.momentum);
  auto p = params.tensors();
  auto v = state.velocity.tensors();
  auto g = grad.tensors();
  for (std::size_t k = 0; k < p.size(); ++k) {
    *v[k].value = mu * *v[k].value + *g[k].value;
    *p[k].value -= lr * *v[k].value;
  }
  ++state.step;
  return report;
}

double ar_accuracy(const ModelParams<float>& params, const TrainingPair& pair) {
  const auto level1 = level1_with_eos(pair.codes, params.config);
  return ar_loss(params, pair.midi, level1).accuracy();
}

double nar_accuracy(const ModelParams<float>& params, const TrainingPair& pair, int level, int prompt_frames) {
  const auto split = split_for_nar(pair.codes, prompt_frames);
  return nar_loss(params, pair.midi, split.target, split.prompt, level).accuracy();
}

}  // namespace pianolm::lm
