#include "pipeline_config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pianolm/digest.hpp"
#include "pianolm/error.hpp"

namespace pianolm::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::uint64_t digest_of(const json& j) { return fnv1a64(j.dump()); }

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ordered_json PipelineConfig::to_json() const {
  ordered_json j;
  j["paths"] = {{"midi_dir", paths.midi_dir}, {"audio_dir", paths.audio_dir}, {"work_dir", paths.work_dir}};
  j["segment"] = {{"min_seconds", segment.min_seconds},
                  {"max_seconds", segment.max_seconds},
                  {"seed", segment.seed},
                  {"keep_remainder_seconds", segment.keep_remainder_seconds},
                  {"min_fragment_seconds", segment.min_fragment_seconds}};
  j["tokenizer"] = {{"pitch_bins", tokenizer.pitch_bins},       {"velocity_bins", tokenizer.velocity_bins},
                    {"duration_bins", tokenizer.duration_bins}, {"ioi_bins", tokenizer.ioi_bins},
                    {"position_bins", tokenizer.position_bins}, {"bar_bins", tokenizer.bar_bins},
                    {"duration_tick", tokenizer.duration_tick}, {"ioi_tick", tokenizer.ioi_tick},
                    {"pseudo_bar_seconds", tokenizer.pseudo_bar_seconds}};
  j["codec"] = {{"levels", codec.rvq.levels},
                {"codebook_size", codec.rvq.codebook_size},
                {"seed", codec.rvq.seed},
                {"max_iterations", codec.rvq.max_iterations},
                {"tolerance", codec.rvq.tolerance},
                {"allow_degenerate", codec.rvq.allow_degenerate},
                {"mel_bands", codec.spectral.mel_bands},
                {"griffin_lim_iterations", codec.griffin_lim_iterations},
                {"finetune_epochs", codec.finetune_epochs},
                {"finetune_iterations", codec.finetune_iterations},
                {"crop_seconds", codec.crop_seconds}};
  j["model"] = ordered_json::parse(model.to_json());
  j["training"] = {{"steps", training.steps},
                   {"batch_size", training.batch_size},
                   {"learning_rate", training.optimizer.learning_rate},
                   {"momentum", training.optimizer.momentum},
                   {"prompt_frames", training.optimizer.prompt_frames},
                   {"seed", training.optimizer.seed},
                   {"log_every", training.log_every}};
  j["prompt"] = {{"seconds", prompt.seconds}, {"mode", tokenizer::to_string(prompt.mode)}};
  j["sampling"] = {{"greedy", sampling.greedy},
                   {"top_k", sampling.top_k},
                   {"temperature", sampling.temperature},
                   {"seed", sampling.seed}};
  j["jobs"] = jobs;
  return j;
}

PipelineConfig PipelineConfig::from_json(const json& j) {
  PipelineConfig c;
  try {
    if (j.contains("paths")) {
      const auto& p = j["paths"];
      read(p, "midi_dir", c.paths.midi_dir);
      read(p, "audio_dir", c.paths.audio_dir);
      read(p, "work_dir", c.paths.work_dir);
    }
    if (j.contains("segment")) {
      const auto& s = j["segment"];
      read(s, "min_seconds", c.segment.min_seconds);
      read(s, "max_seconds", c.segment.max_seconds);
      read(s, "seed", c.segment.seed);
      read(s, "keep_remainder_seconds", c.segment.keep_remainder_seconds);
      read(s, "min_fragment_seconds", c.segment.min_fragment_seconds);
    }
    if (j.contains("tokenizer")) {
      const auto& t = j["tokenizer"];
      read(t, "pitch_bins", c.tokenizer.pitch_bins);
      read(t, "velocity_bins", c.tokenizer.velocity_bins);
      read(t, "duration_bins", c.tokenizer.duration_bins);
      read(t, "ioi_bins", c.tokenizer.ioi_bins);
      read(t, "position_bins", c.tokenizer.position_bins);
      read(t, "bar_bins", c.tokenizer.bar_bins);
      read(t, "duration_tick", c.tokenizer.duration_tick);
      read(t, "ioi_tick", c.tokenizer.ioi_tick);
      read(t, "pseudo_bar_seconds", c.tokenizer.pseudo_bar_seconds);
    }
    if (j.contains("codec")) {
      const auto& k = j["codec"];
      read(k, "levels", c.codec.rvq.levels);
      read(k, "codebook_size", c.codec.rvq.codebook_size);
      read(k, "seed", c.codec.rvq.seed);
      read(k, "max_iterations", c.codec.rvq.max_iterations);
      read(k, "tolerance", c.codec.rvq.tolerance);
      read(k, "allow_degenerate", c.codec.rvq.allow_degenerate);
      read(k, "mel_bands", c.codec.spectral.mel_bands);
      read(k, "griffin_lim_iterations", c.codec.griffin_lim_iterations);
      read(k, "finetune_epochs", c.codec.finetune_epochs);
      read(k, "finetune_iterations", c.codec.finetune_iterations);
      read(k, "crop_seconds", c.codec.crop_seconds);
    }
    if (j.contains("model")) c.model = lm::ModelConfig::from_json(j["model"].dump());
    if (j.contains("training")) {
      const auto& t = j["training"];
      read(t, "steps", c.training.steps);
      read(t, "batch_size", c.training.batch_size);
      read(t, "learning_rate", c.training.optimizer.learning_rate);
      read(t, "momentum", c.training.optimizer.momentum);
      read(t, "prompt_frames", c.training.optimizer.prompt_frames);
      read(t, "seed", c.training.optimizer.seed);
      read(t, "log_every", c.training.log_every);
    }
    if (j.contains("prompt")) {
      const auto& p = j["prompt"];
      read(p, "seconds", c.prompt.seconds);
      if (p.contains("mode")) c.prompt.mode = tokenizer::parse_prompt_cut(p["mode"].get<std::string>());
    }
    if (j.contains("sampling")) {
      const auto& s = j["sampling"];
      read(s, "greedy", c.sampling.greedy);
      read(s, "top_k", c.sampling.top_k);
      read(s, "temperature", c.sampling.temperature);
      read(s, "seed", c.sampling.seed);
    }
    read(j, "jobs", c.jobs);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("bad config value: ") + e.what());
  }
  // codec shape drives the LM vocabulary
  c.model.codebook_size = c.codec.rvq.codebook_size;
  c.model.levels = c.codec.rvq.levels;
  c.model.validate();
  if (c.training.steps < 0 || c.training.batch_size < 1) throw InvalidArgument("training steps/batch size invalid");
  if (c.prompt.seconds < 0.0) throw InvalidArgument("prompt seconds must be non-negative");
  return c;
}

std::uint64_t PipelineConfig::prepare_digest() const {
  const auto j = to_json();
  json part = {{"midi_dir", j["paths"]["midi_dir"]},
               {"audio_dir", j["paths"]["audio_dir"]},
               {"segment", j["segment"]},
               {"tokenizer", j["tokenizer"]}};
  return digest_of(part);
}

std::uint64_t PipelineConfig::codec_digest(std::uint64_t prepare) const {
  const auto j = to_json();
  json part = {{"prepare", prepare}, {"codec", j["codec"]}};
  return digest_of(part);
}

std::uint64_t PipelineConfig::lm_digest(std::uint64_t codec) const {
  const auto j = to_json();
  json part = {{"codec", codec}, {"model", j["model"]}, {"training", j["training"]}};
  return digest_of(part);
}

void apply_overrides(json& j, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw InvalidArgument("override '" + o + "' is not key=value");
    const std::string path = o.substr(0, eq);
    const std::string text = o.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    json* node = &j;
    std::size_t start = 0;
    while (true) {
      const auto dot = path.find('.', start);
      const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (key.empty()) throw InvalidArgument("override '" + o + "' has an empty key");
      if (dot == std::string::npos) {
        (*node)[key] = value;
        break;
      }
      node = &(*node)[key];
      start = dot + 1;
    }
  }
}

PipelineConfig resolve_config(const std::string& config_file, const std::vector<std::string>& overrides,
                              const std::string& work_dir_flag) {
  json j = PipelineConfig{}.to_json();
  if (!config_file.empty()) {
    std::ifstream in(config_file);
    if (!in) throw InvalidArgument("cannot open config file " + config_file);
    std::stringstream ss;
    ss << in.rdbuf();
    const json file = json::parse(ss.str(), nullptr, false);
    if (file.is_discarded()) throw InvalidArgument("config file " + config_file + " is not valid JSON");
    j.merge_patch(file);
  }
  apply_overrides(j, overrides);
  if (const char* env = std::getenv(kWorkDirEnv); env && *env) j["paths"]["work_dir"] = env;
  if (!work_dir_flag.empty()) j["paths"]["work_dir"] = work_dir_flag;
  return PipelineConfig::from_json(j);
}

}  // namespace pianolm::cli
