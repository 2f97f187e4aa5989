#include <algorithm>
#include <cmath>
#include <numbers>

#include "pianolm/error.hpp"
#include "pianolm/midi_io/wav.hpp"

namespace pianolm::midi_io {
namespace {

constexpr int kZeroCrossings = 32;
constexpr double kKaiserBeta = 8.6;

double bessel_i0(double x) {
  double sum = 1.0;
  double term = 1.0;
  for (int k = 1; k < 50; ++k) {
    term *= (x / (2.0 * k)) * (x / (2.0 * k));
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

}  // namespace

std::vector<float> resample(std::span<const float> input, int from_rate, int to_rate) {
  if (from_rate <= 0 || to_rate <= 0) throw InvalidArgument("sample rates must be positive");
  if (from_rate == to_rate) return {input.begin(), input.end()};

  const double ratio = static_cast<double>(to_rate) / from_rate;
  const auto out_len = static_cast<std::size_t>(std::llround(static_cast<double>(input.size()) * ratio));
  const double cutoff = std::min(1.0, ratio) * 0.97;
  const double half_width = kZeroCrossings / cutoff;  // in input samples
  const double i0_beta = bessel_i0(kKaiserBeta);
  constexpr int kTable = 4096;
  std::vector<double> window_table(kTable + 2);
  for (int i = 0; i <= kTable + 1; ++i) {
    const double r = std::min(1.0, static_cast<double>(i) / kTable);
    window_table[static_cast<std::size_t>(i)] = bessel_i0(kKaiserBeta * std::sqrt(1.0 - r * r)) / i0_beta;
  }
  const auto n = static_cast<std::int64_t>(input.size());

  std::vector<float> out(out_len);
  for (std::size_t j = 0; j < out_len; ++j) {
    const double t = static_cast<double>(j) / ratio;
    const auto lo = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(t - half_width)));
    const auto hi = std::min<std::int64_t>(n - 1, static_cast<std::int64_t>(std::floor(t + half_width)));
    double acc = 0.0;
    for (std::int64_t k = lo; k <= hi; ++k) {
      const double x = t - static_cast<double>(k);
      const double arg = cutoff * x;
      const double sinc = arg == 0.0 ? 1.0 : std::sin(std::numbers::pi * arg) / (std::numbers::pi * arg);
      const double pos = std::abs(x) / half_width * kTable;
      const auto idx = static_cast<std::size_t>(pos);
      const double frac = pos - static_cast<double>(idx);
      const double window = window_table[idx] * (1.0 - frac) + window_table[idx + 1] * frac;
      acc += input[static_cast<std::size_t>(k)] * cutoff * sinc * window;
    }
    out[j] = static_cast<float>(acc);
  }
  return out;
}

}  // namespace pianolm::midi_io
