// Property-based acceptance suite. Prints one PASS/FAIL line per criterion;
// exit status is the number of failed criteria (capped at 125).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cli_harness.hpp"
#include "json.hpp"
#include "pianolm/binary_io.hpp"
#include "pianolm/codec/rvq.hpp"
#include "pianolm/codec/spectral.hpp"
#include "pianolm/lm/grad_check.hpp"
#include "pianolm/lm/model.hpp"
#include "pianolm/lm/train.hpp"
#include "pianolm/metrics/metrics.hpp"
#include "pianolm/midi_io/smf.hpp"
#include "pianolm/midi_io/wav.hpp"
#include "pianolm/tokenizer/octuple.hpp"
#include "toy_data.hpp"

using namespace pianolm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// ---------------------------------------------------------------- 1

Outcome tokenizer_round_trip() {
  const tokenizer::TokenizerConfig cfg;
  const auto vocab = cfg.vocab_sizes();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> dur(0.0, 12.0);
  double max_onset = 0.0, max_dur = 0.0, max_dur_in_range = 0.0;
  int max_vel = 0;
  long notes = 0, pitch_errors = 0, vocab_errors = 0, dur_fail = 0, dur_fail_in_range = 0;
  const double in_range = cfg.max_duration() + cfg.duration_tick / 2;
  for (int trial = 0; trial < 10000; ++trial) {
    NoteSequence ns;
    const int n = 1 + static_cast<int>(rng() % 20);
    double t = 0.0;
    for (int i = 0; i < n; ++i) {
      Note note;
      const auto r = rng() % 8;
      note.pitch = r == 0 ? 21 : r == 1 ? 108 : static_cast<int>(21 + rng() % 88);
      note.velocity = r == 2 ? 1 : r == 3 ? 127 : static_cast<int>(1 + rng() % 127);
      note.duration = r == 4 ? 12.0 : r == 5 ? 0.001 : dur(rng);
      note.onset = t;
      t += static_cast<double>(rng() % 300000) / 1e6;  // gaps up to 0.3 s
      ns.notes.push_back(note);
    }
    ns.sort();
    const auto seq = tokenizer::tokenize(ns, cfg);
    for (int s = 0; s < tokenizer::kStreams; ++s)
      for (auto tok : seq.stream(s))
        if (tok < 0 || tok >= vocab[static_cast<std::size_t>(s)]) ++vocab_errors;
    const auto back = tokenizer::detokenize(seq, cfg);
    // canonical order of the quantized notes
    const auto tick = [&](const Note& x) { return std::lround(x.onset / cfg.ioi_tick); };
    std::stable_sort(ns.notes.begin(), ns.notes.end(), [&](const Note& a, const Note& b) {
      if (tick(a) != tick(b)) return tick(a) < tick(b);
      if (a.pitch != b.pitch) return a.pitch < b.pitch;
      if (a.duration != b.duration) return a.duration < b.duration;
      return a.velocity < b.velocity;
    });
    if (back.size() != ns.size()) return {false, "note count changed in trial " + std::to_string(trial)};
    for (std::size_t i = 0; i < ns.size(); ++i) {
      const auto& a = ns.notes[i];
      const auto& b = back.notes[i];
      ++notes;
      pitch_errors += a.pitch != b.pitch;
      max_vel = std::max(max_vel, std::abs(a.velocity - b.velocity));
      max_onset = std::max(max_onset, std::abs(a.onset - b.onset));
      const double de = std::abs(a.duration - b.duration);
      max_dur = std::max(max_dur, de);
      if (de > 0.005 + 1e-9) {
        ++dur_fail;
        if (a.duration <= in_range) ++dur_fail_in_range;
      }
      if (a.duration <= in_range) max_dur_in_range = std::max(max_dur_in_range, de);
    }
  }
  std::ostringstream d;
  d << notes << " notes; max onset err " << fmt("%.2f ms", max_onset * 1e3) << ", max duration err "
    << fmt("%.2f ms", max_dur * 1e3) << " (" << fmt("%.2f ms", max_dur_in_range * 1e3) << " for durations <= "
    << fmt("%.3f s", in_range) << "), " << dur_fail << " notes over 5 ms, " << dur_fail_in_range
    << " of them within the top duration bin; pitch errors " << pitch_errors << ", max velocity step " << max_vel
    << ", out-of-vocab tokens " << vocab_errors;
  const bool ok = max_onset <= 0.005 + 1e-9 && dur_fail == 0 && pitch_errors == 0 && max_vel <= 1 && vocab_errors == 0;
  return {ok, d.str()};
}

// ---------------------------------------------------------------- 2

Outcome rvq_monotonicity() {
  int violations = 0;
  std::string curve;
  for (int corpus_seed = 0; corpus_seed < 20; ++corpus_seed) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(corpus_seed));
    std::normal_distribution<double> g;
    // clustered frames with a spread of scales, like log-mel features
    codec::RowMatrixXd centres(6, 12);
    for (Eigen::Index i = 0; i < centres.size(); ++i) centres.data()[i] = 3.0 * g(rng);
    std::vector<codec::FeatureMatrix> corpus(3);
    for (auto& f : corpus) {
      f.frames.resize(120, 12);
      for (Eigen::Index t = 0; t < 120; ++t)
        for (Eigen::Index d = 0; d < 12; ++d) f.frames(t, d) = centres(static_cast<Eigen::Index>(rng() % 6), d) + g(rng);
    }
    codec::RvqTrainOptions opts;
    opts.codebook_size = 16;
    opts.seed = static_cast<std::uint64_t>(corpus_seed);
    const auto cb = codec::train_rvq(corpus, opts);
    double prev = std::numeric_limits<double>::infinity();
    for (int l = 1; l <= 4; ++l) {
      double se = 0.0;
      Eigen::Index count = 0;
      for (const auto& f : corpus) {
        const auto rec = codec::rvq_decode(codec::rvq_encode(f, cb), cb, l);
        se += (rec.frames - f.frames).squaredNorm();
        count += f.frames.size();
      }
      const double mse = se / static_cast<double>(count);
      if (mse > prev) ++violations;
      if (corpus_seed == 0) curve += (l > 1 ? " " : "") + fmt("%.4f", mse);
      prev = mse;
    }
  }

  double worst_mean_err = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::mt19937_64 rng(1000 + static_cast<std::uint64_t>(trial));
    std::uniform_real_distribution<double> jitter(-1.0, 1.0);
    const int n = 4 + static_cast<int>(rng() % 17);
    codec::RowMatrixXd pts(n, 3);
    Eigen::RowVector3d sums[2] = {Eigen::RowVector3d::Zero(), Eigen::RowVector3d::Zero()};
    int counts[2] = {0, 0};
    for (int i = 0; i < n; ++i) {
      const int c = i % 2;
      pts.row(i) << (c ? 20.0 : -20.0) + jitter(rng), jitter(rng), jitter(rng);
      sums[c] += pts.row(i);
      ++counts[c];
    }
    codec::KMeansOptions ko;
    ko.seed = static_cast<std::uint64_t>(trial);
    const auto r = codec::kmeans(pts, 2, ko);
    for (int c = 0; c < 2; ++c) {
      const Eigen::RowVector3d mean = sums[c] / counts[c];
      const int row = (r.centroids(0, 0) > 0) == (c == 1) ? 0 : 1;
      worst_mean_err = std::max(worst_mean_err, (r.centroids.row(row) - mean).cwiseAbs().maxCoeff());
    }
  }
  std::ostringstream d;
  d << "20 corpora, " << violations << " increases across L=1..4 (corpus 0 MSE: " << curve
    << "); k-means worst mean error " << fmt("%.2e", worst_mean_err) << " over 20 two-cluster inputs";
  return {violations == 0 && worst_mean_err <= 1e-9, d.str()};
}

// ---------------------------------------------------------------- 3

Outcome frechet_oracle() {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> var(0.01, 5.0);
  double worst_closed = 0.0, worst_self = 0.0, worst_sym = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + static_cast<int>(rng() % 32);
    metrics::EmbeddingStats a, b;
    a.count = b.count = 100;
    a.mean.resize(d);
    b.mean.resize(d);
    Eigen::VectorXd va(d), vb(d);
    for (int i = 0; i < d; ++i) {
      a.mean[i] = g(rng);
      b.mean[i] = g(rng);
      va[i] = var(rng);
      vb[i] = var(rng);
    }
    a.covariance = va.asDiagonal();
    b.covariance = vb.asDiagonal();
    const double closed = (a.mean - b.mean).squaredNorm() + (va.cwiseSqrt() - vb.cwiseSqrt()).squaredNorm();
    const double got = metrics::frechet_distance(a, b);
    worst_closed = std::max(worst_closed, std::abs(got - closed));

    codec::FeatureMatrix x, y;
    x.frames.resize(60, d);
    y.frames.resize(60, d);
    for (Eigen::Index i = 0; i < x.frames.size(); ++i) {
      x.frames.data()[i] = g(rng);
      y.frames.data()[i] = 0.5 * g(rng) + 0.3;
    }
    const auto sx = metrics::embedding_stats({x});
    const auto sy = metrics::embedding_stats({y});
    worst_self = std::max(worst_self, std::abs(metrics::frechet_distance(sx, sx)));
    worst_sym = std::max(worst_sym, std::abs(metrics::frechet_distance(sx, sy) - metrics::frechet_distance(sy, sx)));
  }
  std::ostringstream d;
  d << "100 pairs; closed-form max diff " << fmt("%.2e", worst_closed) << ", FAD(X,X) max " << fmt("%.2e", worst_self)
    << ", asymmetry max " << fmt("%.2e", worst_sym);
  return {worst_closed <= 1e-8 && worst_self <= 1e-6 && worst_sym <= 1e-9, d.str()};
}

// ---------------------------------------------------------------- 4

Outcome gradient_check() {
  std::mt19937_64 rng(4);
  const auto cfg = lm::ModelConfig::tiny();
  const auto params = lm::ModelParams<double>::initialize(cfg);
  const std::vector<lm::TrainingPair> batch = {
      testing::random_pair(rng, 5, 6, cfg.levels, cfg.codebook_size),
      testing::random_pair(rng, 4, 5, cfg.levels, cfg.codebook_size)};
  lm::GradCheckOptions opts;
  opts.samples = 256;
  opts.prompt_frames = 2;
  const auto r = lm::grad_check(params, batch, opts);
  std::ostringstream d;
  d << cfg.layers << " layers, dim " << cfg.hidden << ", " << r.checked << " parameters; max relative error "
    << fmt("%.2e", r.max_relative_error) << " at " << r.worst_tensor << "[" << r.worst_index << "]";
  return {r.checked >= 200 && r.max_relative_error < 1e-4, d.str()};
}

// ---------------------------------------------------------------- 5

Outcome causality() {
  std::mt19937_64 rng(5);
  const auto cfg = lm::ModelConfig::tiny();
  const auto params = lm::ModelParams<double>::initialize(cfg);
  const auto pair = testing::random_pair(rng, 6, 12, cfg.levels, cfg.codebook_size);
  const auto level1 = lm::level1_with_eos(pair.codes, cfg);
  const auto base = lm::ar_loss(params, pair.midi, level1).logits;
  // Logit row t predicts level1[t] and reads inputs level1[0..t-1].
  long checks = 0, leaks = 0;
  for (std::size_t p = 0; p + 1 < level1.size(); ++p) {
    auto perturbed = level1;
    perturbed[p] = (perturbed[p] + 3) % cfg.codebook_size;
    const auto logits = lm::ar_loss(params, pair.midi, perturbed).logits;
    for (Eigen::Index t = 0; t <= static_cast<Eigen::Index>(p); ++t) {
      ++checks;
      if (logits.row(t) != base.row(t)) ++leaks;
    }
  }

  const codec::CodecMatrix empty(0, cfg.levels, cfg.codebook_size);
  const double nar_base = lm::nar_loss(params, pair.midi, pair.codes, empty, 2).loss;
  const auto nar_logits = lm::nar_loss(params, pair.midi, pair.codes, empty, 2).logits;
  int changed = 0;
  bool first_row_moved = false;
  for (Eigen::Index t = 1; t < pair.codes.frames(); ++t) {
    auto target = pair.codes;
    target.set(t, 0, (target.at(t, 0) + 1) % cfg.codebook_size);
    const auto r = lm::nar_loss(params, pair.midi, target, empty, 2);
    changed += r.loss != nar_base;
    first_row_moved = first_row_moved || r.logits.row(0) != nar_logits.row(0);
  }
  std::ostringstream d;
  d << "AR: " << checks << " (row, perturbation) checks, " << leaks << " differ; NAR: loss changed for " << changed
    << " of " << pair.codes.frames() - 1 << " future perturbations";
  return {leaks == 0 && changed > 0 && first_row_moved, d.str()};
}

// ---------------------------------------------------------------- 6

Outcome overfit() {
  std::mt19937_64 rng(6);
  lm::ModelConfig cfg;
  cfg.layers = 4;
  cfg.hidden = 128;
  cfg.codebook_size = 64;
  std::vector<lm::TrainingPair> batch;
  for (int i = 0; i < 4; ++i) batch.push_back(testing::random_pair(rng, 12, 50, cfg.levels, cfg.codebook_size));
  auto params = lm::ModelParams<float>::initialize(cfg);
  auto state = lm::OptimizerState::for_model(params);
  lm::TrainOptions opts;
  opts.learning_rate = 0.01;
  double ar = 0.0, nar = 0.0;
  int steps = 0;
  while (steps < 2000) {
    lm::train_step(params, batch, state, opts);
    ++steps;
    if (steps % 25 != 0) continue;
    ar = nar = 0.0;
    for (const auto& pair : batch) {
      ar += lm::ar_accuracy(params, pair) / static_cast<double>(batch.size());
      for (int l = 2; l <= cfg.levels; ++l)
        nar += lm::nar_accuracy(params, pair, l, opts.prompt_frames) / static_cast<double>(batch.size() * (cfg.levels - 1));
    }
    if (ar > 0.99 && nar > 0.95) break;
  }
  std::ostringstream d;
  d << "4 layers, dim 128, K=64, 4 pairs; after " << steps << " steps AR accuracy " << fmt("%.4f", ar)
    << ", NAR accuracy " << fmt("%.4f", nar);
  return {ar > 0.99 && nar > 0.95, d.str()};
}

// ---------------------------------------------------------------- 7

nlohmann::json load_json(const fs::path& path) {
  const auto bytes = read_file(path);
  return nlohmann::json::parse(bytes.begin(), bytes.end());
}

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

Outcome end_to_end() {
  testing::TempDir tmp("acceptance");
  const std::string work = tmp / "work";
  auto step = [&](const std::vector<std::string>& args) {
    const auto r = testing::invoke(args);
    if (r.code != 0) throw std::runtime_error("'" + args[0] + "' exited " + std::to_string(r.code) + ": " + r.err);
    return r;
  };
  step({"make-corpus", "-o", tmp / "corpus", "--pieces", "3", "--seconds", "5", "--seed", "7"});
  const auto common = with({"--work-dir", work}, testing::toy_overrides(1000));
  step(with({"prepare", "--midi-dir", tmp / "corpus/midi", "--audio-dir", tmp / "corpus/audio"}, common));
  step(with({"train-codec"}, common));
  step(with({"train-lm"}, common));

  std::optional<fs::path> prepared;
  for (const auto& e : fs::directory_iterator(work))
    if (e.path().filename().string().rfind("prepare-", 0) == 0) prepared = e.path();
  if (!prepared) throw std::runtime_error("prepare produced no run directory");
  const auto manifest = load_json(*prepared / "manifest.json");
  const auto clip = [&](int i, const char* key) { return (*prepared / manifest["clips"][i][key].get<std::string>()).string(); };

  fs::create_directories(tmp / "gen");
  fs::create_directories(tmp / "ref");
  step(with({"synth", "--midi", clip(1, "midi"), "-o", tmp / "gen/clip.wav"}, common));
  const auto target = midi_io::parse_smf(read_file(clip(1, "midi")));
  const auto wave = midi_io::ingest_audio(read_file(tmp / "gen/clip.wav"));
  const double ratio = wave.seconds() / target.end_time();

  fs::copy_file(tmp / "gen/clip.wav", tmp / "ref/clip.wav");
  step(with({"eval", "--ref", tmp / "ref", "--gen", tmp / "gen", "-o", tmp / "report"}, common));
  const double fad = load_json(tmp / "report/report.json")["fad"].get<double>();

  step(with({"synth", "--midi", clip(2, "midi"), "--prompt-audio", clip(0, "audio"), "--prompt-midi", clip(0, "midi"),
             "-o", tmp / "prompted.wav"},
            common));
  const auto info = load_json(tmp / "prompted.wav.json");
  const auto prompted = midi_io::ingest_audio(read_file(tmp / "prompted.wav"));
  const long frames = info["frames"].get<long>();
  const long prompt_frames = info["prompt_frames"].get<long>();
  const bool prompt_excluded = prompt_frames == 150 && static_cast<long>(prompted.samples.size()) == frames * 640 &&
                               frames <= info["frame_cap"].get<long>();

  std::ostringstream d;
  d << "WAV " << fmt("%.2f s", wave.seconds()) << " for a " << fmt("%.2f s", target.end_time()) << " target (ratio "
    << fmt("%.3f", ratio) << "); self-eval fad " << fad << "; prompted synth used " << prompt_frames
    << " prompt frames and emitted " << frames << " frames (" << prompted.samples.size() << " samples)";
  return {std::abs(ratio - 1.0) <= 0.25 && fad == 0.0 && prompt_excluded, d.str()};
}

// ---------------------------------------------------------------- 8

Outcome frame_arithmetic() {
  const codec::SpectralFrontend fe;
  std::ostringstream d;
  bool ok = true;
  for (const auto [seconds, want] : {std::pair{15.0, 750}, {16.0, 800}, {20.0, 1000}}) {
    Waveform w;
    w.samples.assign(static_cast<std::size_t>(seconds * w.sample_rate), 0.0f);
    const auto t = fe.features(w).length();
    ok = ok && t == want;
    d << fmt("%.1f s", seconds) << " -> " << t << " frames; ";
  }
  Waveform prompt;
  prompt.samples.assign(3 * prompt.sample_rate, 0.0f);
  const auto p = fe.features(prompt).length();
  ok = ok && p == 150;
  d << "3.0 s prompt -> " << p << " frames";
  return {ok, d.str()};
}

struct Criterion {
  const char* title;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("Acceptance criteria");
  std::vector<int> selected;
  app.add_option("-c,--criterion", selected, "Criterion numbers to run (default: all)")->check(CLI::Range(1, 8));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria = {
      {"tokenizer round trip", 30, tokenizer_round_trip},
      {"RVQ residual monotonicity", 60, rvq_monotonicity},
      {"Frechet oracle equivalence", 10, frechet_oracle},
      {"gradient correctness", 120, gradient_check},
      {"causality and bidirectionality", 30, causality},
      {"overfit memorization", 900, overfit},
      {"end-to-end smoke", 1200, end_to_end},
      {"codec frame arithmetic", 10, frame_arithmetic},
  };
  if (selected.empty())
    for (int i = 1; i <= 8; ++i) selected.push_back(i);

  int failed = 0;
  for (int n : selected) {
    const auto& c = criteria[static_cast<std::size_t>(n - 1)];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_budget = elapsed < c.budget_seconds;
    const bool pass = o.pass && in_budget;
    failed += !pass;
    std::printf("%s criterion %d: %s (%.1f s, budget %.0f s%s) - %s\n", pass ? "PASS" : "FAIL", n, c.title, elapsed,
                c.budget_seconds, in_budget ? "" : ", over budget", o.detail.c_str());
    std::fflush(stdout);
  }
  return std::min(failed, 125);
}
