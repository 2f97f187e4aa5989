#include <cmath>

#include "fft_plan.hpp"

namespace pianolm::codec {

std::vector<double> SpectralFrontend::griffin_lim(const RowMatrixXd& magnitude, int iterations) const {
  const auto frames = magnitude.rows();
  const auto bins = static_cast<std::size_t>(cfg_.bins());
  const double to_dft = 1.0 / magnitude_scale_;

  std::vector<std::vector<std::complex<double>>> spec(static_cast<std::size_t>(frames),
                                                      std::vector<std::complex<double>>(bins));
  for (Eigen::Index t = 0; t < frames; ++t)
    for (std::size_t k = 0; k < bins; ++k)
      spec[static_cast<std::size_t>(t)][k] = {magnitude(t, static_cast<Eigen::Index>(k)) * to_dft, 0.0};

  std::vector<double> signal = istft(spec);
  std::vector<float> as_float(signal.size());
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t i = 0; i < signal.size(); ++i) as_float[i] = static_cast<float>(signal[i]);
    auto estimate = stft(as_float, frames);
    for (Eigen::Index t = 0; t < frames; ++t) {
      auto& row = estimate[static_cast<std::size_t>(t)];
      for (std::size_t k = 0; k < bins; ++k) {
        const double target = magnitude(t, static_cast<Eigen::Index>(k)) * to_dft;
        const double a = std::abs(row[k]);
        row[k] = a > 0.0 ? row[k] * (target / a) : std::complex<double>(target, 0.0);
      }
    }
    signal = istft(estimate);
  }
  return signal;
}

}  // namespace pianolm::codec
