#pragma once

#include <complex>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "pianolm/codec/spectral.hpp"

namespace pianolm::codec {

struct SpectralFrontend::FftPlan {
  explicit FftPlan() { fft.SetFlag(Eigen::FFT<double>::HalfSpectrum); }

  // Eigen::FFT caches twiddles internally, so each call site gets its own plan
  // when used concurrently.
  Eigen::FFT<double> fft;
};

}  // namespace pianolm::codec
