#include <ostream>

#include "artifacts.hpp"
#include "commands.hpp"
#include "pianolm/binary_io.hpp"
#include "pianolm/digest.hpp"
#include "pianolm/lm/checkpoint.hpp"
#include "pianolm/lm/generate.hpp"
#include "pianolm/midi_io/smf.hpp"
#include "pianolm/midi_io/wav.hpp"

namespace pianolm::cli {

int cmd_synth(const Common& common, const SynthArgs& args, std::ostream& out) {
  const auto cfg = common.resolve();
  if (args.prompt_audio.empty() != args.prompt_midi.empty())
    throw UsageError("--prompt-audio and --prompt-midi must be given together");
  if (!fs::exists(args.midi)) throw UsageError("MIDI file " + args.midi + " does not exist");

  fs::path ckpt_path = args.checkpoint.empty() ? locate_run("", cfg.paths.work_dir, "lm") : fs::path(args.checkpoint);
  if (fs::is_directory(ckpt_path)) ckpt_path /= "model.mvlm";
  if (!fs::exists(ckpt_path)) throw UsageError("checkpoint " + ckpt_path.string() + " does not exist");
  const auto ckpt = lm::decode_checkpoint(read_file(ckpt_path));

  std::string codec_dir = args.codec;
  if (codec_dir.empty()) {
    const auto lm_manifest = ckpt_path.parent_path() / "manifest.json";
    if (fs::exists(lm_manifest)) codec_dir = read_json(lm_manifest).value("codec_run", "");
  }
  const auto codec_run = load_codec_run(locate_run(codec_dir, cfg.paths.work_dir, "codec"));
  if (codec_run.digest != ckpt.codec_digest)
    throw Error("codec digest mismatch: checkpoint expects " + digest_hex(ckpt.codec_digest) + ", codebook is " +
                digest_hex(codec_run.digest) + "; refusing to synthesize");

  const codec::SpectralFrontend frontend(codec_run.spectral);
  const auto target = midi_io::parse_smf(read_file(args.midi));
  std::optional<lm::PromptSpec> prompt;
  if (!args.prompt_audio.empty()) {
    if (!fs::exists(args.prompt_audio)) throw UsageError("prompt audio " + args.prompt_audio + " does not exist");
    if (!fs::exists(args.prompt_midi)) throw UsageError("prompt MIDI " + args.prompt_midi + " does not exist");
    auto wave = read_wave(args.prompt_audio);
    const auto keep = static_cast<std::size_t>(std::lround(cfg.prompt.seconds * wave.sample_rate));
    if (wave.samples.size() > keep) wave.samples.resize(keep);
    prompt = lm::PromptSpec{midi_io::parse_smf(read_file(args.prompt_midi)),
                            codec::rvq_encode(frontend.features(wave), codec_run.codebooks), cfg.prompt.seconds,
                            cfg.prompt.mode};
  }

  lm::GenerateOptions options;
  options.sampling = cfg.sampling;
  options.tokenizer = cfg.tokenizer;
  options.frame_rate = frontend.config().frame_rate();
  options.target_seconds = args.target_seconds;
  const auto result = lm::generate(ckpt.params, target, prompt, options);

  Waveform wave;
  if (result.codes.frames() > 0)
    wave = frontend.synthesize(codec::rvq_decode(result.codes, codec_run.codebooks), cfg.codec.griffin_lim_iterations);

  fs::path wav_path = args.out;
  if (wav_path.empty()) {
    const auto dir = make_run_dir(cfg.paths.work_dir, "synth", ckpt.config_digest, common.run_dir);
    wav_path = dir / (fs::path(args.midi).stem().string() + ".wav");
  }
  write_file(wav_path, midi_io::write_wav(wave, midi_io::WavEncoding::Float32, digest_comment("lm", ckpt.config_digest)));

  nlohmann::ordered_json info;
  info["midi"] = args.midi;
  info["lm_digest"] = digest_hex(ckpt.config_digest);
  info["codec_digest"] = digest_hex(codec_run.digest);
  info["target_seconds"] = args.target_seconds > 0.0 ? args.target_seconds : target.end_time();
  info["frames"] = result.codes.frames();
  info["frame_cap"] = result.frame_cap;
  info["prompt_frames"] = result.prompt_frames;
  info["reached_eos"] = result.reached_eos;
  info["samples"] = wave.samples.size();
  info["warnings"] = result.warnings;
  auto json_path = wav_path;
  json_path += ".json";
  write_json(json_path, info);
  for (const auto& w : result.warnings) out << "warning: " << w << "\n";
  out << "wrote " << wav_path.string() << " (" << result.codes.frames() << " frames, " << wave.seconds() << " s)\n";
  return 0;
}

}  // namespace pianolm::cli
