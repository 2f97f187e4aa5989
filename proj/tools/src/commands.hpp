#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pianolm/error.hpp"
#include "pipeline_config.hpp"

namespace pianolm::cli {

/// Bad or missing command-line input; mapped to exit code 2.
class UsageError : public Error {
public:
  using Error::Error;
};

struct Common {
  std::string config_file;
  std::vector<std::string> overrides;
  std::string work_dir;
  std::string run_dir;
  int jobs = -1;

  PipelineConfig resolve() const;
};

struct PrepareArgs {
  std::string midi_dir;
  std::string audio_dir;
};

struct TrainCodecArgs {
  std::string prepared;
};

struct TrainLmArgs {
  std::string prepared;
  std::string codec;
  std::string resume;
};

struct SynthArgs {
  std::string midi;
  std::string prompt_audio;
  std::string prompt_midi;
  std::string checkpoint;
  std::string codec;
  std::string out;
  double target_seconds = 0.0;
};

struct EvalArgs {
  std::string ref;
  std::string gen;
  std::string reference = "audio";
  std::string codec;
  std::string out;
};

struct GradCheckArgs {
  int samples = 256;
  double epsilon = 1e-5;
  std::uint64_t seed = 0;
};

struct CorpusArgs {
  std::string out;
  int pieces = 3;
  double seconds = 5.0;
  std::uint64_t seed = 0;
};

int cmd_prepare(const Common& common, const PrepareArgs& args, std::ostream& out);
int cmd_train_codec(const Common& common, const TrainCodecArgs& args, std::ostream& out);
int cmd_train_lm(const Common& common, const TrainLmArgs& args, std::ostream& out);
int cmd_synth(const Common& common, const SynthArgs& args, std::ostream& out);
int cmd_eval(const Common& common, const EvalArgs& args, std::ostream& out);
int cmd_gradcheck(const GradCheckArgs& args, std::ostream& out);
int cmd_make_corpus(const CorpusArgs& args, std::ostream& out);

}  // namespace pianolm::cli
