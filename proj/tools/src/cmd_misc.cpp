#include <ostream>
#include <random>

#include "commands.hpp"
#include "pianolm/lm/grad_check.hpp"
#include "synthetic.hpp"

namespace pianolm::cli {

int cmd_gradcheck(const GradCheckArgs& args, std::ostream& out) {
  auto cfg = lm::ModelConfig::tiny();
  cfg.seed = args.seed;
  const auto params = lm::ModelParams<double>::initialize(cfg);

  std::mt19937_64 rng(args.seed);
  std::vector<lm::TrainingPair> batch;
  for (const auto& piece : synthetic_corpus({2, 1.5, args.seed})) {
    lm::TrainingPair pair{tokenizer::tokenize(piece.midi), codec::CodecMatrix(6, cfg.levels, cfg.codebook_size),
                          piece.name};
    for (Eigen::Index t = 0; t < pair.codes.frames(); ++t)
      for (int l = 0; l < cfg.levels; ++l)
        pair.codes.set(t, l, static_cast<std::int32_t>(rng() % static_cast<std::uint64_t>(cfg.codebook_size)));
    batch.push_back(std::move(pair));
  }

  lm::GradCheckOptions options;
  options.samples = args.samples;
  options.epsilon = args.epsilon;
  options.prompt_frames = 2;
  options.seed = args.seed;
  const auto r = lm::grad_check(params, batch, options);
  out << "checked " << r.checked << " parameters, max relative error " << r.max_relative_error << " ("
      << r.worst_tensor << "[" << r.worst_index << "] analytic " << r.worst_analytic << " numeric "
      << r.worst_numeric << ")\n";
  return r.max_relative_error < 1e-4 ? 0 : 1;
}

int cmd_make_corpus(const CorpusArgs& args, std::ostream& out) {
  write_synthetic_corpus(args.out, {args.pieces, args.seconds, args.seed});
  out << "wrote " << args.pieces << " pieces to " << args.out << "\n";
  return 0;
}

}  // namespace pianolm::cli
