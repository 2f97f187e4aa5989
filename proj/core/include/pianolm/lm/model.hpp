#pragma once

#include <span>
#include <vector>

#include "pianolm/codec/rvq.hpp"
#include "pianolm/lm/params.hpp"
#include "pianolm/tokenizer/octuple.hpp"

namespace pianolm::lm {

enum class Decoder { Ar, Nar };

/// Pooled MIDI embeddings (N x d) for one decoder, before positional encoding.
template <class T>
Mat<T> embed_pooled(const ModelParams<T>& params, const tokenizer::OctupleSequence& midi,
                    Decoder which = Decoder::Ar);

/// Level-1 column of `codes` followed by the EOS token.
std::vector<int> level1_with_eos(const codec::CodecMatrix& codes, const ModelConfig& config);

template <class T>
struct LossResult {
  double loss = 0.0;
  Mat<T> logits;             // one row per predicted token
  std::vector<int> targets;  // class per logits row

  /// Fraction of rows whose argmax equals the target (ties break low).
  double accuracy() const;
};

/// Teacher-forced AR loss over level1 (which must end with EOS).
template <class T>
LossResult<T> ar_loss(const ModelParams<T>& params, const tokenizer::OctupleSequence& midi,
                      std::span<const int> level1);

/// NAR loss for one level in 2..L. `prompt` may have zero frames.
template <class T>
LossResult<T> nar_loss(const ModelParams<T>& params, const tokenizer::OctupleSequence& midi,
                       const codec::CodecMatrix& target, const codec::CodecMatrix& prompt, int level);

/// Mean softmax cross-entropy; fills d(loss)/d(logits) when `grad` is set.
template <class T>
double cross_entropy(const Mat<T>& logits, std::span<const int> targets, Mat<T>* grad = nullptr);

}  // namespace pianolm::lm
