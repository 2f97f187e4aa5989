#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "pianolm/midi_io/types.hpp"

namespace pianolm::codec {

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct SpectralConfig {
  int sample_rate = kCanonicalSampleRate;
  int hop = 640;      // 50 frames per second at 32 kHz
  int window = 2048;  // also the FFT size
  int mel_bands = 64;
  double fmin = 0.0;
  double fmax = 16000.0;
  double log_floor = -10.0;

  int bins() const { return window / 2 + 1; }
  double frame_rate() const { return static_cast<double>(sample_rate) / hop; }
  friend bool operator==(const SpectralConfig&, const SpectralConfig&) = default;
};

/// T x D log10 mel frames at the codec frame rate.
struct FeatureMatrix {
  RowMatrixXd frames;
  double frame_rate = 50.0;
  int sample_rate = kCanonicalSampleRate;

  Eigen::Index length() const { return frames.rows(); }
  Eigen::Index dim() const { return frames.cols(); }
};

/// round(samples / hop), never less than one frame.
Eigen::Index frame_count(std::size_t samples, const SpectralConfig& cfg = {});

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Deterministic STFT / log-mel analysis and Griffin-Lim resynthesis.
///
/// Frame t is centred on sample t*hop + hop/2 and reads a zero-padded Hann
/// window around it, so T frames tile exactly T*hop samples.
class SpectralFrontend {
public:
  explicit SpectralFrontend(SpectralConfig cfg = {});
  ~SpectralFrontend();
  SpectralFrontend(SpectralFrontend&&) noexcept;
  SpectralFrontend& operator=(SpectralFrontend&&) noexcept;

  const SpectralConfig& config() const noexcept { return cfg_; }

  /// T x bins complex STFT (unscaled DFT of the windowed frames).
  std::vector<std::vector<std::complex<double>>> stft(std::span<const float> samples,
                                                       Eigen::Index frames) const;
  /// Overlap-add inverse with squared-window normalisation; returns frames*hop samples.
  std::vector<double> istft(const std::vector<std::vector<std::complex<double>>>& spectrum) const;

  /// T x bins magnitude, scaled so a unit-amplitude sinusoid peaks near 1.
  RowMatrixXd magnitude(std::span<const float> samples) const;
  RowMatrixXd magnitude(std::span<const float> samples, Eigen::Index frames) const;

  FeatureMatrix features(const Waveform& wave) const;
  FeatureMatrix features_from_magnitude(const RowMatrixXd& magnitude) const;

  /// Mel pseudo-inverse to linear magnitude followed by Griffin-Lim phase
  /// recovery from a zero-phase start. Output holds T*hop samples.
  Waveform synthesize(const FeatureMatrix& features, int iterations = 32) const;
  std::vector<double> griffin_lim(const RowMatrixXd& magnitude, int iterations) const;

  /// D x bins triangular filterbank (unit peak).
  const Eigen::MatrixXd& mel_filterbank() const noexcept { return mel_; }
  /// D + 2 band edge frequencies in Hz; band m spans [edges[m], edges[m+2]].
  const std::vector<double>& mel_edges_hz() const noexcept { return edges_hz_; }
  double bin_hz(Eigen::Index bin) const { return static_cast<double>(bin) * cfg_.sample_rate / cfg_.window; }

private:
  struct FftPlan;

  SpectralConfig cfg_;
  std::vector<double> window_;
  double magnitude_scale_ = 1.0;
  Eigen::MatrixXd mel_;
  Eigen::MatrixXd mel_pinv_;
  std::vector<double> edges_hz_;
  std::unique_ptr<FftPlan> fft_;
};

}  // namespace pianolm::codec
