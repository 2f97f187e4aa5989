#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pianolm/codec/spectral.hpp"

namespace pianolm::metrics {

/// Gaussian fit of a pool of embedding frames.
struct EmbeddingStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;  // unbiased, exactly symmetric
  Eigen::Index count = 0;

  Eigen::Index dim() const { return mean.size(); }
};

/// Mean and unbiased covariance over all frames pooled across clips.
EmbeddingStats embedding_stats(const std::vector<codec::FeatureMatrix>& features);

/// ||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a S_b)^{1/2}).
///
/// The trace of the square root is taken from the eigenvalues of the
/// symmetric form S_a^{1/2} S_b S_a^{1/2}, floored at zero. The value is the
/// average of both argument orders, so it is exactly symmetric.
double frechet_distance(const EmbeddingStats& a, const EmbeddingStats& b);

/// RMSE between log-mel spectrograms normalised by the reference's value
/// range. gen is analysed with ref's frame count (trimmed or zero padded).
double spectrogram_nrmse(const Waveform& ref, const Waveform& gen, const codec::SpectralFrontend& frontend);

/// T x 12 chroma: STFT power folded onto the nearest pitch class over MIDI
/// 21..108, each frame L1-normalised (silent frames become uniform).
codec::RowMatrixXd chroma(const Waveform& wave, const codec::SpectralFrontend& frontend, Eigen::Index frames);

/// Mean absolute chroma difference over frames and bins.
double chroma_mae(const Waveform& ref, const Waveform& gen, const codec::SpectralFrontend& frontend);

struct MetricSummary {
  double mean = 0.0;
  double ci95 = 0.0;  // 1.96 * standard error over clips
};

MetricSummary summarize(std::span<const double> values);

struct ClipMetrics {
  std::string clip_id;
  double spec_nrmse = 0.0;
  double chroma_mae = 0.0;
};

struct MetricReport {
  double fad = 0.0;
  MetricSummary spec_nrmse;
  MetricSummary chroma_mae;
  std::vector<ClipMetrics> clips;
  std::string reference = "audio";  // or "reconstruction"
};

/// Aggregates per-clip values into corpus means and confidence intervals.
void finalize(MetricReport& report);

std::string report_json(const MetricReport& report, const std::string& digest = {});
std::string report_csv(const MetricReport& report);

}  // namespace pianolm::metrics
