#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "pianolm/codec/rvq.hpp"
#include "pianolm/codec/spectral.hpp"
#include "pianolm/lm/config.hpp"
#include "pianolm/lm/generate.hpp"
#include "pianolm/lm/train.hpp"
#include "pianolm/midi_io/segment.hpp"
#include "pianolm/tokenizer/octuple.hpp"

namespace pianolm::cli {

struct Paths {
  std::string midi_dir;
  std::string audio_dir;
  std::string work_dir = "work";
};

struct CodecSettings {
  codec::RvqTrainOptions rvq;
  codec::SpectralConfig spectral;
  int griffin_lim_iterations = 32;
  int finetune_epochs = 0;
  int finetune_iterations = 5;
  double crop_seconds = 1.0;
};

struct TrainingSettings {
  int steps = 1000;
  int batch_size = 4;
  lm::TrainOptions optimizer;
  int log_every = 50;
};

struct PromptSettings {
  double seconds = 3.0;
  tokenizer::PromptCut mode = tokenizer::PromptCut::HardCut;
};

/// Everything a pipeline run depends on. Serialised as one JSON document.
struct PipelineConfig {
  Paths paths;
  midi_io::SegmentOptions segment;
  tokenizer::TokenizerConfig tokenizer;
  CodecSettings codec;
  lm::ModelConfig model;
  TrainingSettings training;
  PromptSettings prompt;
  lm::SamplingOptions sampling;
  int jobs = 0;  // 0 = hardware concurrency

  nlohmann::ordered_json to_json() const;
  static PipelineConfig from_json(const nlohmann::json& j);

  /// Per-stage fingerprints. Each covers the settings that stage reads plus
  /// the digest of the stage it consumes.
  std::uint64_t prepare_digest() const;
  std::uint64_t codec_digest(std::uint64_t prepare) const;
  std::uint64_t lm_digest(std::uint64_t codec) const;
};

/// Applies "a.b.c=value" overrides; value is parsed as JSON, else taken as a string.
void apply_overrides(nlohmann::json& j, const std::vector<std::string>& overrides);

/// Defaults, then the config file, then overrides, then the work-dir
/// environment variable and flag (flag wins).
PipelineConfig resolve_config(const std::string& config_file, const std::vector<std::string>& overrides,
                              const std::string& work_dir_flag);

inline constexpr const char* kWorkDirEnv = "PIANOLM_WORK_DIR";

}  // namespace pianolm::cli
