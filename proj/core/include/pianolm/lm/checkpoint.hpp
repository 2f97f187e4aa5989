#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "pianolm/binary_io.hpp"
#include "pianolm/lm/params.hpp"
#include "pianolm/lm/train.hpp"

namespace pianolm::lm {

struct Checkpoint {
  ModelParams<float> params;
  std::optional<OptimizerState> optimizer;
  std::uint64_t config_digest = 0;
  std::uint64_t codec_digest = 0;
};

/// MVLM file: magic, digests, model config JSON, named float32 tensors and
/// optionally the optimizer velocity and step.
Bytes encode_checkpoint(const Checkpoint& checkpoint);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> data);

}  // namespace pianolm::lm
