#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pianolm/lm/config.hpp"

namespace pianolm::lm {

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <class T>
struct LayerParams {
  Mat<T> ln1_gain, ln1_bias;  // 1 x d
  Mat<T> wq, bq, wk, bk, wv, bv, wo, bo;
  Mat<T> ln2_gain, ln2_bias;
  Mat<T> w1, b1;  // d x f, 1 x f
  Mat<T> w2, b2;  // f x d, 1 x d
};

/// Per-stream MIDI embeddings and the pooling projection (no bias).
template <class T>
struct MidiEmbedding {
  std::array<Mat<T>, tokenizer::kStreams> tables;
  Mat<T> projection;  // concat_dim x d
};

template <class T>
struct DecoderParams {
  MidiEmbedding<T> midi;
  std::vector<LayerParams<T>> layers;
  Mat<T> final_gain, final_bias;
};

/// Every trainable tensor of the AR and NAR decoders.
template <class T>
struct ModelParams {
  ModelConfig config;

  DecoderParams<T> ar;
  Mat<T> ar_codec_embedding;  // (K + 2) x d, rows K and K+1 are EOS and PAD
  Mat<T> ar_head, ar_head_bias;

  DecoderParams<T> nar;
  std::vector<Mat<T>> nar_codec_embedding;  // L tables of K x d
  Mat<T> nar_level_embedding;               // (L - 1) x d, row l-2 for level l
  std::vector<Mat<T>> nar_head, nar_head_bias;  // L - 1 heads of d x K

  struct Tensor {
    std::string name;
    Mat<T>* value;
  };
  struct ConstTensor {
    std::string name;
    const Mat<T>* value;
  };
  /// Stable, ordered list of named tensors (checkpoint and optimizer order).
  std::vector<Tensor> tensors();
  std::vector<ConstTensor> tensors() const;

  std::size_t parameter_count() const;
  bool all_finite() const;
  void set_zero();

  /// Same-shaped zero tensors.
  static ModelParams zeros_like(const ModelConfig& config);
  /// Seeded initialisation from config.seed.
  static ModelParams initialize(const ModelConfig& config);

  template <class U>
  ModelParams<U> cast() const;
};

extern template struct ModelParams<float>;
extern template struct ModelParams<double>;

}  // namespace pianolm::lm
