#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/QR>

#include "fft_plan.hpp"
#include "pianolm/error.hpp"

namespace pianolm::codec {

Eigen::Index frame_count(std::size_t samples, const SpectralConfig& cfg) {
  const auto t = std::llround(static_cast<double>(samples) / cfg.hop);
  return std::max<Eigen::Index>(1, static_cast<Eigen::Index>(t));
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

SpectralFrontend::SpectralFrontend(SpectralConfig cfg) : cfg_(cfg), fft_(std::make_unique<FftPlan>()) {
  if (cfg_.window <= 0 || cfg_.hop <= 0 || cfg_.mel_bands <= 0 || cfg_.window % 2 != 0)
    throw InvalidArgument("invalid spectral configuration");
  if (cfg_.fmax > cfg_.sample_rate / 2.0 || cfg_.fmin < 0.0 || cfg_.fmin >= cfg_.fmax)
    throw InvalidArgument("mel range must satisfy 0 <= fmin < fmax <= Nyquist");

  const auto n = static_cast<std::size_t>(cfg_.window);
  window_.resize(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    window_[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
    sum += window_[i];
  }
  magnitude_scale_ = 2.0 / sum;

  const int d = cfg_.mel_bands;
  const double mel_lo = hz_to_mel(cfg_.fmin);
  const double mel_hi = hz_to_mel(cfg_.fmax);
  edges_hz_.resize(static_cast<std::size_t>(d + 2));
  for (int i = 0; i < d + 2; ++i)
    edges_hz_[static_cast<std::size_t>(i)] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (d + 1));

  mel_ = Eigen::MatrixXd::Zero(d, cfg_.bins());
  for (int m = 0; m < d; ++m) {
    const double lo = edges_hz_[static_cast<std::size_t>(m)];
    const double mid = edges_hz_[static_cast<std::size_t>(m + 1)];
    const double hi = edges_hz_[static_cast<std::size_t>(m + 2)];
    for (int k = 0; k < cfg_.bins(); ++k) {
      const double f = bin_hz(k);
      double w = 0.0;
      if (f > lo && f <= mid)
        w = (f - lo) / (mid - lo);
      else if (f > mid && f < hi)
        w = (hi - f) / (hi - mid);
      mel_(m, k) = w;
    }
  }
  mel_pinv_ = Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(mel_).pseudoInverse();
}

SpectralFrontend::~SpectralFrontend() = default;
SpectralFrontend::SpectralFrontend(SpectralFrontend&&) noexcept = default;
SpectralFrontend& SpectralFrontend::operator=(SpectralFrontend&&) noexcept = default;

std::vector<std::vector<std::complex<double>>> SpectralFrontend::stft(std::span<const float> samples,
                                                                      Eigen::Index frames) const {
  const auto n = static_cast<std::int64_t>(cfg_.window);
  const auto len = static_cast<std::int64_t>(samples.size());
  std::vector<double> buf(static_cast<std::size_t>(n));
  std::vector<std::vector<std::complex<double>>> out(static_cast<std::size_t>(frames));
  for (Eigen::Index t = 0; t < frames; ++t) {
    const std::int64_t start = t * cfg_.hop + cfg_.hop / 2 - n / 2;
    for (std::int64_t i = 0; i < n; ++i) {
      const auto s = start + i;
      buf[static_cast<std::size_t>(i)] =
          (s >= 0 && s < len) ? samples[static_cast<std::size_t>(s)] * window_[static_cast<std::size_t>(i)] : 0.0;
    }
    fft_->fft.fwd(out[static_cast<std::size_t>(t)], buf);
    out[static_cast<std::size_t>(t)].resize(static_cast<std::size_t>(cfg_.bins()));
  }
  return out;
}

std::vector<double> SpectralFrontend::istft(const std::vector<std::vector<std::complex<double>>>& spectrum) const {
  const auto n = static_cast<std::int64_t>(cfg_.window);
  const auto frames = static_cast<std::int64_t>(spectrum.size());
  const auto len = frames * cfg_.hop;
  std::vector<double> out(static_cast<std::size_t>(len), 0.0);
  std::vector<double> norm(static_cast<std::size_t>(len), 0.0);
  std::vector<double> buf;
  for (std::int64_t t = 0; t < frames; ++t) {
    auto half = spectrum[static_cast<std::size_t>(t)];
    fft_->fft.inv(buf, half, static_cast<Eigen::Index>(n));
    const std::int64_t start = t * cfg_.hop + cfg_.hop / 2 - n / 2;
    for (std::int64_t i = 0; i < n; ++i) {
      const auto s = start + i;
      if (s < 0 || s >= len) continue;
      const double w = window_[static_cast<std::size_t>(i)];
      out[static_cast<std::size_t>(s)] += w * buf[static_cast<std::size_t>(i)];
      norm[static_cast<std::size_t>(s)] += w * w;
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i)
    if (norm[i] > 1e-10) out[i] /= norm[i];
  return out;
}

RowMatrixXd SpectralFrontend::magnitude(std::span<const float> samples) const {
  return magnitude(samples, frame_count(samples.size(), cfg_));
}

RowMatrixXd SpectralFrontend::magnitude(std::span<const float> samples, Eigen::Index frames) const {
  const auto spec = stft(samples, frames);
  RowMatrixXd mag(frames, cfg_.bins());
  for (Eigen::Index t = 0; t < frames; ++t)
    for (int k = 0; k < cfg_.bins(); ++k)
      mag(t, k) = std::abs(spec[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)]) * magnitude_scale_;
  return mag;
}

FeatureMatrix SpectralFrontend::features_from_magnitude(const RowMatrixXd& magnitude) const {
  FeatureMatrix out;
  out.frame_rate = cfg_.frame_rate();
  out.sample_rate = cfg_.sample_rate;
  out.frames = magnitude * mel_.transpose();
  const double floor_linear = std::pow(10.0, cfg_.log_floor);
  for (Eigen::Index i = 0; i < out.frames.size(); ++i) {
    const double v = out.frames.data()[i];
    out.frames.data()[i] = v > floor_linear ? std::log10(v) : cfg_.log_floor;
  }
  return out;
}

FeatureMatrix SpectralFrontend::features(const Waveform& wave) const {
  if (wave.sample_rate != cfg_.sample_rate)
    throw InvalidArgument("frame_features expects " + std::to_string(cfg_.sample_rate) + " Hz audio, got " +
                          std::to_string(wave.sample_rate));
  return features_from_magnitude(magnitude(wave.samples));
}

Waveform SpectralFrontend::synthesize(const FeatureMatrix& features, int iterations) const {
  if (features.dim() != cfg_.mel_bands)
    throw InvalidArgument("feature dimension " + std::to_string(features.dim()) + " does not match " +
                          std::to_string(cfg_.mel_bands) + " mel bands");
  RowMatrixXd mel_linear = features.frames.unaryExpr([](double v) { return std::pow(10.0, v); });
  RowMatrixXd mag = (mel_linear * mel_pinv_.transpose()).cwiseMax(0.0);
  const auto samples = griffin_lim(mag, iterations);
  Waveform out;
  out.sample_rate = cfg_.sample_rate;
  out.samples.resize(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i)
    out.samples[i] = static_cast<float>(std::clamp(samples[i], -1.0, 1.0));
  return out;
}

}  // namespace pianolm::codec
