#include <algorithm>
#include <cmath>
#include <random>

#include "network.hpp"
#include "pianolm/lm/grad_check.hpp"
#include "pianolm/lm/model.hpp"

namespace pianolm::lm {

double combined_loss(const ModelParams<double>& params, std::span<const TrainingPair> batch, int nar_level,
                     int prompt_frames, ModelParams<double>* grad) {
  if (batch.empty()) throw InvalidArgument("empty batch");
  const double scale = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (const auto& pair : batch) {
    const auto level1 = level1_with_eos(pair.codes, params.config);
    total += detail::ar_objective<double>(params, pair.midi, level1, grad, scale, nullptr).loss;
    if (nar_level >= 2) {
      const auto split = split_for_nar(pair.codes, prompt_frames);
      total += detail::nar_objective<double>(params, pair.midi, split.target, split.prompt, nar_level, grad, scale,
                                             nullptr)
                   .loss;
    }
  }
  return total * scale;
}

GradCheckResult grad_check(const ModelParams<double>& params, std::span<const TrainingPair> batch,
                           const GradCheckOptions& options) {
  auto grad = ModelParams<double>::zeros_like(params.config);
  combined_loss(params, batch, options.nar_level, options.prompt_frames, &grad);

  auto probe = params;
  auto tensors = probe.tensors();
  const auto grads = grad.tensors();
  std::vector<std::size_t> offsets;
  std::size_t total = 0;
  for (const auto& t : tensors) {
    offsets.push_back(total);
    total += static_cast<std::size_t>(t.value->size());
  }

  std::mt19937_64 rng(options.seed);
  GradCheckResult result;
  for (int s = 0; s < options.samples; ++s) {
    const std::size_t flat = static_cast<std::size_t>(rng() % total);
    const auto k = static_cast<std::size_t>(std::upper_bound(offsets.begin(), offsets.end(), flat) - offsets.begin() - 1);
    const auto idx = static_cast<Eigen::Index>(flat - offsets[k]);
    double& value = tensors[k].value->data()[idx];
    const double saved = value;
    value = saved + options.epsilon;
    const double up = combined_loss(probe, batch, options.nar_level, options.prompt_frames);
    value = saved - options.epsilon;
    const double down = combined_loss(probe, batch, options.nar_level, options.prompt_frames);
    value = saved;
    const double numeric = (up - down) / (2.0 * options.epsilon);
    const double analytic = grads[k].value->data()[idx];
    const double denom = std::max({std::abs(analytic), std::abs(numeric), options.floor});
    const double rel = std::abs(analytic - numeric) / denom;
    ++result.checked;
    if (rel >= result.max_relative_error) {
      result.max_relative_error = rel;
      result.worst_tensor = tensors[k].name;
      result.worst_index = idx;
      result.worst_analytic = analytic;
      result.worst_numeric = numeric;
    }
  }
  return result;
}

}  // namespace pianolm::lm
