#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "artifacts.hpp"
#include "commands.hpp"
#include "pianolm/binary_io.hpp"
#include "pianolm/digest.hpp"
#include "pianolm/lm/checkpoint.hpp"
#include "pianolm/tokenizer/token_file.hpp"

namespace pianolm::cli {

namespace {

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::uint64_t epoch) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + epoch);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
  return order;
}

}  // namespace

int cmd_train_lm(const Common& common, const TrainLmArgs& args, std::ostream& out) {
  auto cfg = common.resolve();
  const auto prepared = load_prepared(locate_run(args.prepared, cfg.paths.work_dir, "prepare"));
  const auto codec_run = load_codec_run(locate_run(args.codec, cfg.paths.work_dir, "codec"));
  if (codec_run.prepare_digest != prepared.digest)
    throw UsageError("codec run " + codec_run.dir.string() + " was trained on a different prepare run");
  cfg.model.codebook_size = codec_run.codebooks.codebook_size();
  cfg.model.levels = codec_run.codebooks.level_count();
  const auto digest = cfg.lm_digest(codec_run.digest);

  std::vector<lm::TrainingPair> pairs;
  for (const auto& clip : prepared.clips) {
    auto tokens = tokenizer::decode_token_file(read_file(clip.tokens));
    pairs.push_back({std::move(tokens.tokens), load_clip_codes(codec_run, clip.id), clip.id});
    const auto rows = static_cast<int>(pairs.back().midi.length() + pairs.back().codes.frames());
    if (rows > cfg.model.max_sequence)
      throw UsageError("clip " + clip.id + " needs " + std::to_string(rows) + " rows but model.max_sequence is " +
                       std::to_string(cfg.model.max_sequence) + "; use shorter segments or raise max_sequence");
  }
  if (pairs.empty()) throw UsageError("no training clips");

  lm::ModelParams<float> params;
  lm::OptimizerState state;
  if (!args.resume.empty()) {
    auto ckpt = lm::decode_checkpoint(read_file(args.resume));
    if (!(ckpt.params.config == cfg.model)) throw UsageError("checkpoint model config differs from the resolved config");
    if (ckpt.codec_digest != codec_run.digest) throw UsageError("checkpoint was trained against another codec");
    params = std::move(ckpt.params);
    state = ckpt.optimizer ? std::move(*ckpt.optimizer) : lm::OptimizerState::for_model(params);
  } else {
    params = lm::ModelParams<float>::initialize(cfg.model);
    state = lm::OptimizerState::for_model(params);
  }

  const auto dir = make_run_dir(cfg.paths.work_dir, "lm", digest, common.run_dir);
  std::ostringstream log;
  log << "step,ar_loss,nar_loss,nar_level\n" << std::setprecision(9);
  const auto batch_size = static_cast<std::size_t>(cfg.training.batch_size);
  lm::StepReport last;
  while (state.step < static_cast<std::uint64_t>(cfg.training.steps)) {
    std::vector<lm::TrainingPair> batch;
    for (std::size_t b = 0; b < batch_size; ++b) {
      const std::uint64_t k = state.step * batch_size + b;
      const auto order = epoch_order(pairs.size(), cfg.training.optimizer.seed, k / pairs.size());
      batch.push_back(pairs[order[k % pairs.size()]]);
    }
    const auto step = state.step;
    last = lm::train_step(params, batch, state, cfg.training.optimizer);
    log << step + 1 << "," << last.ar_loss << "," << last.nar_loss << "," << last.nar_level << "\n";
    if (cfg.training.log_every > 0 && (step + 1) % static_cast<std::uint64_t>(cfg.training.log_every) == 0)
      out << "step " << step + 1 << " ar " << last.ar_loss << " nar " << last.nar_loss << "\n" << std::flush;
  }

  lm::Checkpoint ckpt{params, state, digest, codec_run.digest};
  write_file(dir / "model.mvlm", lm::encode_checkpoint(ckpt));
  write_text(dir / "loss.csv", log.str());

  nlohmann::ordered_json manifest;
  manifest["stage"] = "lm";
  manifest["digest"] = digest_hex(digest);
  manifest["codec_digest"] = digest_hex(codec_run.digest);
  manifest["codec_run"] = fs::absolute(codec_run.dir).string();
  manifest["config"] = cfg.to_json();
  manifest["parameters"] = params.parameter_count();
  manifest["steps"] = state.step;
  manifest["final_ar_loss"] = last.ar_loss;
  manifest["final_nar_loss"] = last.nar_loss;
  write_json(dir / "manifest.json", manifest);
  out << "trained " << state.step << " steps (" << params.parameter_count() << " parameters) in " << dir.string()
      << "\n";
  return 0;
}

}  // namespace pianolm::cli
