#include <algorithm>
#include <ostream>

#include "artifacts.hpp"
#include "commands.hpp"
#include "parallel.hpp"
#include "pianolm/digest.hpp"
#include "pianolm/metrics/metrics.hpp"

namespace pianolm::cli {

namespace {

std::vector<std::string> wav_names(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw UsageError(dir.string() + " is not a directory");
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".wav") names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace

int cmd_eval(const Common& common, const EvalArgs& args, std::ostream& out) {
  const auto cfg = common.resolve();
  const auto names = wav_names(args.ref);
  if (names.empty()) throw UsageError("no .wav files in " + args.ref);
  for (const auto& n : names)
    if (!fs::exists(fs::path(args.gen) / n)) throw UsageError("generated directory lacks " + n);

  const bool reconstruct = args.reference == "reconstruction";
  std::optional<CodecRun> codec_run;
  codec::SpectralConfig spectral = cfg.codec.spectral;
  if (reconstruct) {
    codec_run = load_codec_run(locate_run(args.codec, cfg.paths.work_dir, "codec"));
    spectral = codec_run->spectral;
  }
  const codec::SpectralFrontend frontend(spectral);

  metrics::MetricReport report;
  report.reference = args.reference;
  report.clips.resize(names.size());
  std::vector<codec::FeatureMatrix> ref_features(names.size()), gen_features(names.size());
  parallel_for(names.size(), cfg.jobs, [&](std::size_t i) {
    auto ref = read_wave(fs::path(args.ref) / names[i]);
    const auto gen = read_wave(fs::path(args.gen) / names[i]);
    if (reconstruct) {
      const auto codes = codec::rvq_encode(frontend.features(ref), codec_run->codebooks);
      ref = frontend.synthesize(codec::rvq_decode(codes, codec_run->codebooks), cfg.codec.griffin_lim_iterations);
    }
    report.clips[i] = {fs::path(names[i]).stem().string(), metrics::spectrogram_nrmse(ref, gen, frontend),
                       metrics::chroma_mae(ref, gen, frontend)};
    ref_features[i] = frontend.features(ref);
    gen_features[i] = frontend.features(gen);
  });
  report.fad =
      metrics::frechet_distance(metrics::embedding_stats(ref_features), metrics::embedding_stats(gen_features));
  metrics::finalize(report);

  nlohmann::json key = {{"ref", fs::absolute(args.ref).string()},
                        {"gen", fs::absolute(args.gen).string()},
                        {"reference", args.reference},
                        {"codec", codec_run ? digest_hex(codec_run->digest) : ""}};
  const auto digest = fnv1a64(key.dump());
  const fs::path dir = args.out.empty() ? make_run_dir(cfg.paths.work_dir, "eval", digest, common.run_dir)
                                        : make_run_dir("", "eval", digest, args.out);
  write_text(dir / "report.json", metrics::report_json(report, digest_hex(digest)));
  write_text(dir / "report.csv", metrics::report_csv(report));
  out << "fad " << report.fad << " spec_nrmse " << report.spec_nrmse.mean << " chroma_mae " << report.chroma_mae.mean
      << " (" << names.size() << " clips) -> " << dir.string() << "\n";
  return 0;
}

}  // namespace pianolm::cli
