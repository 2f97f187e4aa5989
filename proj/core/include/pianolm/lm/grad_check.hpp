#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "pianolm/lm/params.hpp"
#include "pianolm/lm/train.hpp"

namespace pianolm::lm {

struct GradCheckOptions {
  double epsilon = 1e-5;
  int samples = 256;
  int nar_level = 2;
  int prompt_frames = 150;
  /// Denominator floor for the relative error.
  double floor = 1e-7;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  int checked = 0;
  std::string worst_tensor;
  Eigen::Index worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// Mean AR + NAR loss over a batch, in double precision.
double combined_loss(const ModelParams<double>& params, std::span<const TrainingPair> batch, int nar_level,
                     int prompt_frames, ModelParams<double>* grad = nullptr);

/// Central differences on randomly sampled scalars against backprop.
GradCheckResult grad_check(const ModelParams<double>& params, std::span<const TrainingPair> batch,
                           const GradCheckOptions& options = {});

}  // namespace pianolm::lm
