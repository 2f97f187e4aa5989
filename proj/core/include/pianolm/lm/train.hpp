#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "pianolm/codec/rvq.hpp"
#include "pianolm/lm/params.hpp"
#include "pianolm/tokenizer/octuple.hpp"

namespace pianolm::lm {

struct TrainingPair {
  tokenizer::OctupleSequence midi;
  codec::CodecMatrix codes;
  std::string id;
};

struct TrainOptions {
  double learning_rate = 1e-3;
  double momentum = 0.9;
  /// NAR prompt is the first min(prompt_frames, T/2) frames of the same clip.
  int prompt_frames = 150;
  /// 0 samples a level in 2..L per step from (seed, step).
  int nar_level = 0;
  std::uint64_t seed = 0;
};

struct OptimizerState {
  ModelParams<float> velocity;
  std::uint64_t step = 0;

  static OptimizerState for_model(const ModelParams<float>& params);
};

struct StepReport {
  double ar_loss = 0.0;
  double nar_loss = 0.0;
  int nar_level = 0;
  double loss() const { return ar_loss + nar_loss; }
};

/// One SGD-with-momentum step on the mean AR + NAR loss of `batch`.
/// Throws Error naming the sample if a loss is not finite.
StepReport train_step(ModelParams<float>& params, std::span<const TrainingPair> batch, OptimizerState& state,
                      const TrainOptions& options);

/// The NAR level sampled for a given step.
int sample_nar_level(const ModelConfig& config, std::uint64_t seed, std::uint64_t step);

struct NarSplit {
  codec::CodecMatrix prompt;
  codec::CodecMatrix target;
};
NarSplit split_for_nar(const codec::CodecMatrix& codes, int prompt_frames);

/// Teacher-forced token accuracy, EOS included for AR.
double ar_accuracy(const ModelParams<float>& params, const TrainingPair& pair);
double nar_accuracy(const ModelParams<float>& params, const TrainingPair& pair, int level, int prompt_frames);

}  // namespace pianolm::lm
