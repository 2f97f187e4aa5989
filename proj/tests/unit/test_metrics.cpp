#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "json.hpp"
#include "pianolm/error.hpp"
#include "pianolm/metrics/metrics.hpp"

using namespace pianolm;
using namespace pianolm::metrics;

namespace {

Waveform tone(double hz, double seconds, double amp = 0.4) {
  Waveform w;
  w.samples.resize(static_cast<std::size_t>(std::lround(seconds * w.sample_rate)));
  for (std::size_t i = 0; i < w.samples.size(); ++i)
    w.samples[i] = static_cast<float>(amp * std::sin(2 * std::numbers::pi * hz * static_cast<double>(i) / w.sample_rate));
  return w;
}

EmbeddingStats gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov) {
  EmbeddingStats s;
  s.count = 100;
  s.mean = std::move(mean);
  s.covariance = std::move(cov);
  return s;
}

}  // namespace

TEST(Frechet, UnitShiftInOneDimension) {
  const auto a = gaussian(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1));
  const auto b = gaussian(Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Identity(1, 1));
  EXPECT_NEAR(frechet_distance(a, b), 1.0, 1e-12);
}

TEST(Frechet, DiagonalClosedForm) {
  Eigen::Vector3d ma(0, 1, 2), mb(1, 1, 0);
  Eigen::Vector3d va(1, 4, 9), vb(4, 1, 0.25);
  const auto a = gaussian(ma, va.asDiagonal().toDenseMatrix());
  const auto b = gaussian(mb, vb.asDiagonal().toDenseMatrix());
  double expected = (ma - mb).squaredNorm();
  for (int i = 0; i < 3; ++i) expected += std::pow(std::sqrt(va[i]) - std::sqrt(vb[i]), 2);
  EXPECT_NEAR(frechet_distance(a, b), expected, 1e-9);
}

TEST(Frechet, SymmetricNonNegativeAndZeroOnSelf) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  auto random_stats = [&] {
    codec::FeatureMatrix f;
    f.frames.resize(80, 6);
    for (Eigen::Index i = 0; i < f.frames.size(); ++i) f.frames.data()[i] = g(rng);
    return embedding_stats({f});
  };
  const auto a = random_stats();
  const auto b = random_stats();
  EXPECT_EQ(frechet_distance(a, b), frechet_distance(b, a));
  EXPECT_GE(frechet_distance(a, b), 0.0);
  EXPECT_EQ(frechet_distance(a, a), 0.0);
}

TEST(Frechet, EmbeddingStatsArePooled) {
  codec::FeatureMatrix x, y;
  x.frames.resize(2, 1);
  x.frames << 0.0, 2.0;
  y.frames.resize(2, 1);
  y.frames << 4.0, 6.0;
  const auto s = embedding_stats({x, y});
  EXPECT_EQ(s.count, 4);
  EXPECT_DOUBLE_EQ(s.mean[0], 3.0);
  EXPECT_NEAR(s.covariance(0, 0), 20.0 / 3.0, 1e-12);
}

TEST(Frechet, Errors) {
  const auto a = gaussian(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2));
  const auto b = gaussian(Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(3, 3));
  EXPECT_THROW(frechet_distance(a, b), InvalidArgument);
  auto c = a;
  c.mean[0] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(frechet_distance(a, c), InvalidArgument);
  codec::FeatureMatrix one;
  one.frames = codec::RowMatrixXd::Zero(1, 2);
  EXPECT_THROW(embedding_stats({one}), InvalidArgument);
}

TEST(Nrmse, IdentityIsZero) {
  const codec::SpectralFrontend fe;
  const auto w = tone(440.0, 1.0);
  EXPECT_EQ(spectrogram_nrmse(w, w, fe), 0.0);
}

TEST(Nrmse, SilenceAgainstToneIsPositive) {
  const codec::SpectralFrontend fe;
  const auto w = tone(440.0, 1.0);
  Waveform silent;
  silent.samples.assign(w.samples.size(), 0.0f);
  const double e = spectrogram_nrmse(w, silent, fe);
  EXPECT_GT(e, 0.05);
  EXPECT_TRUE(std::isfinite(e));
}

TEST(Nrmse, IgnoresTrailingSubHopSamples) {
  const codec::SpectralFrontend fe;
  const auto ref = tone(440.0, 1.0);
  auto gen = tone(445.0, 1.0);
  const double base = spectrogram_nrmse(ref, gen, fe);
  gen.samples.resize(gen.samples.size() + 100, 0.0f);
  EXPECT_NEAR(spectrogram_nrmse(ref, gen, fe), base, 1e-12);
}

TEST(Chroma, FramesAreDistributions) {
  const codec::SpectralFrontend fe;
  const auto c = chroma(tone(440.0, 1.0), fe, 50);
  ASSERT_EQ(c.rows(), 50);
  ASSERT_EQ(c.cols(), 12);
  for (Eigen::Index t = 0; t < c.rows(); ++t) EXPECT_NEAR(c.row(t).sum(), 1.0, 1e-9);
  Eigen::Index best = 0;
  c.row(25).maxCoeff(&best);
  EXPECT_EQ(best, 9);  // A
}

TEST(Chroma, DifferentPitchClassesNearTwoTwelfths) {
  const codec::SpectralFrontend fe;
  const auto a = tone(440.0, 1.0);
  const auto c = tone(261.63, 1.0);
  EXPECT_EQ(chroma_mae(a, a, fe), 0.0);
  const double d = chroma_mae(a, c, fe);
  EXPECT_NEAR(d, 2.0 / 12.0, 0.03);
  EXPECT_LE(d, 2.0 / 12.0 + 1e-12);
}

TEST(Summary, MeanAndInterval) {
  const std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
  const auto s = summarize(v);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.ci95, 1.96 * std::sqrt(5.0 / 3.0) / 2.0, 1e-12);
  const std::vector<double> one = {7.0};
  EXPECT_EQ(summarize(one).ci95, 0.0);
}

TEST(Report, JsonAndCsv) {
  MetricReport r;
  r.fad = 1.5;
  r.clips = {{"a", 0.1, 0.2}, {"b", 0.3, 0.4}};
  finalize(r);
  EXPECT_NEAR(r.spec_nrmse.mean, 0.2, 1e-12);
  const auto j = nlohmann::json::parse(report_json(r, "abc"));
  EXPECT_DOUBLE_EQ(j["fad"].get<double>(), 1.5);
  EXPECT_EQ(j["clips"].size(), 2u);
  const auto csv = report_csv(r);
  EXPECT_NE(csv.find("a,"), std::string::npos);
  EXPECT_NE(csv.find("b,"), std::string::npos);
}
