#include "cli.hpp"

#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

namespace pianolm::cli {

PipelineConfig Common::resolve() const {
  auto cfg = resolve_config(config_file, overrides, work_dir);
  if (jobs >= 0) cfg.jobs = jobs;
  return cfg;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Expressive piano synthesis with a codec language model", "pianolm"};
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  app.add_option("-c,--config", common.config_file, "JSON pipeline config");
  app.add_option("-s,--set", common.overrides, "Override a config value, e.g. training.steps=200");
  app.add_option("--work-dir", common.work_dir, "Work directory (overrides $PIANOLM_WORK_DIR)");
  app.add_option("--run-dir", common.run_dir, "Write outputs here instead of a fresh run directory");
  app.add_option("-j,--jobs", common.jobs, "Worker threads for per-file stages (0 = all cores)");

  PrepareArgs prepare;
  auto* prep = app.add_subcommand("prepare", "Segment aligned MIDI/audio pairs into tokenized clips");
  prep->add_option("--midi-dir", prepare.midi_dir, "Directory of .mid files");
  prep->add_option("--audio-dir", prepare.audio_dir, "Directory of .wav files with matching names");

  TrainCodecArgs codec_args;
  auto* tc = app.add_subcommand("train-codec", "Fit RVQ codebooks and encode every clip");
  tc->add_option("--prepared", codec_args.prepared, "prepare run directory (default: latest)");

  TrainLmArgs lm_args;
  auto* tl = app.add_subcommand("train-lm", "Train the AR and NAR decoders");
  tl->add_option("--prepared", lm_args.prepared, "prepare run directory (default: latest)");
  tl->add_option("--codec", lm_args.codec, "train-codec run directory (default: latest)");
  tl->add_option("--resume", lm_args.resume, "Checkpoint to continue from");

  SynthArgs synth;
  auto* sy = app.add_subcommand("synth", "Render a MIDI file to audio");
  sy->add_option("--midi", synth.midi, "Target performance MIDI")->required();
  sy->add_option("--prompt-audio", synth.prompt_audio, "Prompt audio (first prompt.seconds are used)");
  sy->add_option("--prompt-midi", synth.prompt_midi, "MIDI paired with the prompt audio");
  sy->add_option("--checkpoint", synth.checkpoint, "Checkpoint file or train-lm run directory");
  sy->add_option("--codec", synth.codec, "train-codec run directory");
  sy->add_option("-o,--out", synth.out, "Output WAV path");
  sy->add_option("--target-seconds", synth.target_seconds, "Target length for the frame cap (default: MIDI end)");

  EvalArgs eval;
  auto* ev = app.add_subcommand("eval", "Compare generated audio against references");
  ev->add_option("--ref", eval.ref, "Reference WAV directory")->required();
  ev->add_option("--gen", eval.gen, "Generated WAV directory (same file names)")->required();
  ev->add_option("--reference", eval.reference, "audio or reconstruction")
      ->check(CLI::IsMember({"audio", "reconstruction"}));
  ev->add_option("--codec", eval.codec, "train-codec run used for --reference reconstruction");
  ev->add_option("-o,--out", eval.out, "Report directory");

  GradCheckArgs gc;
  auto* g = app.add_subcommand("gradcheck", "Finite-difference check of the tiny model's gradients");
  g->add_option("--samples", gc.samples, "Parameters to probe")->check(CLI::PositiveNumber);
  g->add_option("--epsilon", gc.epsilon, "Central difference step");
  g->add_option("--seed", gc.seed, "Seed for data and probe selection");

  CorpusArgs corpus;
  auto* mc = app.add_subcommand("make-corpus", "Write a synthetic aligned MIDI/audio corpus");
  mc->add_option("-o,--out", corpus.out, "Output directory")->required();
  mc->add_option("--pieces", corpus.pieces, "Number of pieces")->check(CLI::PositiveNumber);
  mc->add_option("--seconds", corpus.seconds, "Length of each piece")->check(CLI::PositiveNumber);
  mc->add_option("--seed", corpus.seed, "Random seed");

  std::vector<std::string> rest(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    if (*prep) return cmd_prepare(common, prepare, out);
    if (*tc) return cmd_train_codec(common, codec_args, out);
    if (*tl) return cmd_train_lm(common, lm_args, out);
    if (*sy) return cmd_synth(common, synth, out);
    if (*ev) return cmd_eval(common, eval, out);
    if (*g) return cmd_gradcheck(gc, out);
    if (*mc) return cmd_make_corpus(corpus, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

int run(int argc, const char* const* argv) {
  return run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace pianolm::cli
