#include <cmath>

#include "pianolm/error.hpp"
#include "pianolm/metrics/metrics.hpp"

namespace pianolm::metrics {
namespace {

void require_rate(const Waveform& w, const codec::SpectralFrontend& frontend) {
  if (w.sample_rate != frontend.config().sample_rate)
    throw InvalidArgument("metric inputs must be at " + std::to_string(frontend.config().sample_rate) + " Hz");
}

}  // namespace

double spectrogram_nrmse(const Waveform& ref, const Waveform& gen, const codec::SpectralFrontend& frontend) {
  require_rate(ref, frontend);
  require_rate(gen, frontend);
  const auto frames = codec::frame_count(ref.samples.size(), frontend.config());
  const auto r = frontend.features_from_magnitude(frontend.magnitude(ref.samples, frames)).frames;
  const auto g = frontend.features_from_magnitude(frontend.magnitude(gen.samples, frames)).frames;
  const double rmse = std::sqrt((r - g).array().square().mean());
  const double range = r.maxCoeff() - r.minCoeff();
  constexpr double kMinRange = 1e-8;
  if (range < kMinRange) return (r - g).cwiseAbs().maxCoeff() <= kMinRange ? 0.0 : rmse / kMinRange;
  return rmse / range;
}

codec::RowMatrixXd chroma(const Waveform& wave, const codec::SpectralFrontend& frontend, Eigen::Index frames) {
  require_rate(wave, frontend);
  const auto mag = frontend.magnitude(wave.samples, frames);
  const int bins = frontend.config().bins();
  std::vector<int> pitch_class(static_cast<std::size_t>(bins), -1);
  for (int k = 1; k < bins; ++k) {
    const double midi = 69.0 + 12.0 * std::log2(frontend.bin_hz(k) / 440.0);
    const auto nearest = std::lround(midi);
    if (nearest >= kLowestPianoPitch && nearest <= kHighestPianoPitch)
      pitch_class[static_cast<std::size_t>(k)] = static_cast<int>(nearest % 12);
  }
  codec::RowMatrixXd out = codec::RowMatrixXd::Zero(frames, 12);
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (int k = 0; k < bins; ++k) {
      const int pc = pitch_class[static_cast<std::size_t>(k)];
      if (pc >= 0) out(t, pc) += mag(t, k) * mag(t, k);
    }
    const double total = out.row(t).sum();
    if (total > 0.0)
      out.row(t) /= total;
    else
      out.row(t).setConstant(1.0 / 12.0);
  }
  return out;
}

double chroma_mae(const Waveform& ref, const Waveform& gen, const codec::SpectralFrontend& frontend) {
  const auto frames = codec::frame_count(ref.samples.size(), frontend.config());
  const auto a = chroma(ref, frontend, frames);
  const auto b = chroma(gen, frontend, frames);
  return (a - b).cwiseAbs().mean();
}

}  // namespace pianolm::metrics
