#include <cstdlib>
#include <fstream>
#include <regex>

#include <gtest/gtest.h>

#include "cli_harness.hpp"
#include "pianolm/error.hpp"
#include "pipeline_config.hpp"
#include "workspace.hpp"

using namespace pianolm;
using namespace pianolm::cli;
using pianolm::testing::invoke;
using pianolm::testing::TempDir;
using pianolm::testing::toy_overrides;

namespace {

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

class ScopedEnv {
public:
  ScopedEnv(const char* name, const std::string& value) : name_(name) {
    if (const char* old = std::getenv(name)) old_ = old;
    ::setenv(name, value.c_str(), 1);
  }
  ~ScopedEnv() {
    if (old_.empty()) ::unsetenv(name_);
    else ::setenv(name_, old_.c_str(), 1);
  }

private:
  const char* name_;
  std::string old_;
};

}  // namespace

TEST(PipelineConfig, OverridesParseJsonOrString) {
  nlohmann::json j = PipelineConfig{}.to_json();
  apply_overrides(j, {"training.steps=7", "paths.midi_dir=some dir", "model.midi_embed_dims=[1,2,3,4,5,6]",
                      "sampling.greedy=true"});
  const auto c = PipelineConfig::from_json(j);
  EXPECT_EQ(c.training.steps, 7);
  EXPECT_EQ(c.paths.midi_dir, "some dir");
  EXPECT_EQ(c.model.midi_embed_dims[5], 6);
  EXPECT_TRUE(c.sampling.greedy);
  EXPECT_THROW(apply_overrides(j, {"no-equals-sign"}), Error);
}

TEST(PipelineConfig, RoundTripsThroughJson) {
  PipelineConfig c;
  c.training.steps = 12;
  c.codec.rvq.codebook_size = 32;
  const auto back = PipelineConfig::from_json(nlohmann::json::parse(c.to_json().dump()));
  EXPECT_EQ(back.training.steps, 12);
  EXPECT_EQ(back.model.codebook_size, 32);  // follows the codec
  const auto again = PipelineConfig::from_json(nlohmann::json::parse(back.to_json().dump()));
  EXPECT_EQ(again.to_json(), back.to_json());
}

TEST(PipelineConfig, WorkDirPrecedence) {
  TempDir tmp("cfg");
  const ScopedEnv env(kWorkDirEnv, tmp / "from-env");
  EXPECT_EQ(resolve_config("", {}, "").paths.work_dir, tmp / "from-env");
  EXPECT_EQ(resolve_config("", {}, tmp / "from-flag").paths.work_dir, tmp / "from-flag");

  std::ofstream(tmp / "c.json") << R"({"training": {"steps": 3}, "paths": {"work_dir": "x"}})";
  const auto c = resolve_config(tmp / "c.json", {"training.steps=4"}, "");
  EXPECT_EQ(c.training.steps, 4);
  EXPECT_EQ(c.paths.work_dir, tmp / "from-env");
}

TEST(PipelineConfig, DigestsChainThroughStages) {
  const PipelineConfig base;
  auto digests = [](const PipelineConfig& c) {
    const auto p = c.prepare_digest();
    const auto k = c.codec_digest(p);
    return std::array<std::uint64_t, 3>{p, k, c.lm_digest(k)};
  };
  const auto d0 = digests(base);
  EXPECT_EQ(d0, digests(base));

  auto lm_only = base;
  lm_only.training.steps += 1;
  auto d = digests(lm_only);
  EXPECT_EQ(d[0], d0[0]);
  EXPECT_EQ(d[1], d0[1]);
  EXPECT_NE(d[2], d0[2]);

  auto codec = base;
  codec.codec.rvq.levels = 3;
  d = digests(codec);
  EXPECT_EQ(d[0], d0[0]);
  EXPECT_NE(d[1], d0[1]);
  EXPECT_NE(d[2], d0[2]);

  auto seg = base;
  seg.segment.max_seconds = 18.0;
  d = digests(seg);
  EXPECT_NE(d[0], d0[0]);
  EXPECT_NE(d[1], d0[1]);
  EXPECT_NE(d[2], d0[2]);

  auto sampling = base;
  sampling.sampling.seed = 99;
  EXPECT_EQ(digests(sampling), d0);
}

TEST(Workspace, RunDirectoryNaming) {
  const auto name = run_dir_name("codec", 0x0123456789abcdefULL);
  EXPECT_TRUE(std::regex_match(name, std::regex(R"(codec-\d{8}-\d{6}-01234567)"))) << name;

  TempDir tmp("ws");
  const auto a = make_run_dir(tmp.path(), "prepare", 1, "");
  write_json(a / "manifest.json", {{"digest", "1"}});
  const auto b = make_run_dir(tmp.path(), "prepare", 2, tmp / "explicit");
  EXPECT_EQ(b, tmp.path() / "explicit");
  EXPECT_EQ(latest_run(tmp.path(), "prepare"), a);
  EXPECT_FALSE(latest_run(tmp.path(), "codec").has_value());
  EXPECT_THROW(locate_run("", tmp.path(), "codec"), Error);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(invoke({}).code, 2);
  EXPECT_EQ(invoke({"frobnicate"}).code, 2);
  EXPECT_EQ(invoke({"synth"}).code, 2);
  EXPECT_EQ(invoke({"eval", "--ref", "a"}).code, 2);
  EXPECT_EQ(invoke({"make-corpus", "-o", "x", "--pieces", "0"}).code, 2);
  EXPECT_EQ(invoke({"--help"}).code, 0);
}

TEST(Cli, MissingInputsFail) {
  TempDir tmp("missing");
  const auto r = invoke({"train-codec", "--work-dir", tmp.path().string()});
  EXPECT_NE(r.code, 0);
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, GradCheckPasses) {
  const auto r = invoke({"gradcheck", "--samples", "64"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
}

TEST(Cli, SmallPipelineEndToEnd) {
  TempDir tmp("e2e");
  const std::string work = tmp / "work";
  ASSERT_EQ(invoke({"make-corpus", "-o", tmp / "corpus", "--pieces", "3", "--seconds", "5"}).code, 0);
  const auto common = concat({"--work-dir", work}, toy_overrides(20));

  auto r = invoke(concat({"prepare", "--midi-dir", tmp / "corpus/midi", "--audio-dir", tmp / "corpus/audio"}, common));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto prepared = latest_run(work, "prepare");
  ASSERT_TRUE(prepared.has_value());
  const auto manifest = read_json(*prepared / "manifest.json");
  EXPECT_EQ(manifest["clips"].size(), 3u);
  EXPECT_TRUE(std::filesystem::exists(*prepared / "clips.jsonl"));

  r = invoke(concat({"prepare", "--midi-dir", tmp / "corpus/midi", "--audio-dir", tmp / "corpus/audio"}, common));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("3 unchanged"), std::string::npos) << r.out;

  ASSERT_EQ(invoke(concat({"train-codec"}, common)).code, 0);
  r = invoke(concat({"train-lm"}, common));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lm_run = latest_run(work, "lm");
  ASSERT_TRUE(lm_run.has_value());
  EXPECT_TRUE(std::filesystem::exists(*lm_run / "model.mvlm"));
  EXPECT_TRUE(std::filesystem::exists(*lm_run / "loss.csv"));

  const std::string clip_midi = (*prepared / manifest["clips"][0]["midi"].get<std::string>()).string();
  std::filesystem::create_directories(tmp / "gen");
  r = invoke(concat({"synth", "--midi", clip_midi, "-o", tmp / "gen/a.wav"}, common));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto info = read_json(tmp / "gen/a.wav.json");
  EXPECT_LE(info["frames"].get<int>(), info["frame_cap"].get<int>());

  std::filesystem::create_directories(tmp / "ref");
  std::filesystem::copy_file(tmp / "gen/a.wav", tmp / "ref/a.wav");
  r = invoke(concat({"eval", "--ref", tmp / "ref", "--gen", tmp / "gen", "-o", tmp / "report"}, common));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = read_json(tmp / "report/report.json");
  EXPECT_EQ(report["fad"].get<double>(), 0.0);

  // A codec trained with other settings no longer matches the checkpoint.
  ASSERT_EQ(invoke(concat(concat({"train-codec", "--run-dir", tmp / "other-codec"}, common),
                          {"-s", "codec.seed=5"})).code, 0);
  r = invoke(concat({"synth", "--midi", clip_midi, "--codec", tmp / "other-codec", "-o", tmp / "gen/b.wav"}, common));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("mismatch"), std::string::npos) << r.err;
}
