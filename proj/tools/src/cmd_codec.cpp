#include <ostream>
#include <random>

#include "artifacts.hpp"
#include "commands.hpp"
#include "parallel.hpp"
#include "pianolm/binary_io.hpp"
#include "pianolm/codec/codec_files.hpp"
#include "pianolm/digest.hpp"

namespace pianolm::cli {

namespace {

/// One random crop of `frames` rows per clip (whole clip when shorter).
std::vector<codec::FeatureMatrix> random_crops(const std::vector<codec::FeatureMatrix>& corpus, Eigen::Index frames,
                                               std::mt19937_64& rng) {
  std::vector<codec::FeatureMatrix> crops;
  for (const auto& f : corpus) {
    codec::FeatureMatrix crop = f;
    if (f.length() > frames) {
      const auto start = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(f.length() - frames + 1));
      crop.frames = f.frames.middleRows(start, frames);
    }
    crops.push_back(std::move(crop));
  }
  return crops;
}

}  // namespace

int cmd_train_codec(const Common& common, const TrainCodecArgs& args, std::ostream& out) {
  const auto cfg = common.resolve();
  const auto prepared = load_prepared(locate_run(args.prepared, cfg.paths.work_dir, "prepare"));
  if (prepared.clips.empty()) throw UsageError("prepare run " + prepared.dir.string() + " has no clips");
  const auto digest = cfg.codec_digest(prepared.digest);
  const auto dir = make_run_dir(cfg.paths.work_dir, "codec", digest, common.run_dir);

  const codec::SpectralFrontend frontend(cfg.codec.spectral);
  std::vector<codec::FeatureMatrix> features(prepared.clips.size());
  parallel_for(prepared.clips.size(), cfg.jobs,
               [&](std::size_t i) { features[i] = frontend.features(read_wave(prepared.clips[i].audio)); });

  auto codebooks = codec::train_rvq(features, cfg.codec.rvq);
  std::mt19937_64 rng(cfg.codec.rvq.seed ^ 0x6372'6f70ULL);
  const auto crop_frames =
      std::max<Eigen::Index>(1, std::lround(cfg.codec.crop_seconds * cfg.codec.spectral.frame_rate()));
  for (int epoch = 0; epoch < cfg.codec.finetune_epochs; ++epoch)
    codec::refine_rvq(codebooks, random_crops(features, crop_frames, rng), cfg.codec.finetune_iterations);

  write_file(dir / "codebook.rvq", codec::encode_codebook_file(codebooks, digest));
  nlohmann::ordered_json clips = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto codes = codec::rvq_encode(features[i], codebooks);
    write_file(dir / "codes" / (prepared.clips[i].id + ".codx"), codec::encode_codec_file(codes, digest));
    clips.push_back({{"id", prepared.clips[i].id}, {"frames", codes.frames()}});
  }

  nlohmann::ordered_json manifest;
  manifest["stage"] = "codec";
  manifest["digest"] = digest_hex(digest);
  manifest["prepare_digest"] = digest_hex(prepared.digest);
  manifest["prepare_run"] = fs::absolute(prepared.dir).string();
  manifest["config"] = cfg.to_json();
  manifest["mel_bands"] = cfg.codec.spectral.mel_bands;
  manifest["levels"] = nlohmann::ordered_json::array();
  for (const auto& s : codebooks.stats)
    manifest["levels"].push_back({{"iterations", s.iterations}, {"distortion", s.distortion}});
  manifest["clips"] = clips;
  write_json(dir / "manifest.json", manifest);
  out << "trained " << codebooks.level_count() << "x" << codebooks.codebook_size() << " codebooks on "
      << features.size() << " clips in " << dir.string() << "\n";
  return 0;
}

}  // namespace pianolm::cli
