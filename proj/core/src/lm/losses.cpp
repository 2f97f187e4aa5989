#include "network.hpp"
#include "pianolm/lm/model.hpp"

namespace pianolm::lm {

template <class T>
double LossResult<T>::accuracy() const {
  if (targets.empty()) return 1.0;
  std::size_t hits = 0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < logits.cols(); ++j)
      if (logits(i, j) > logits(i, best)) best = j;
    if (best == targets[static_cast<std::size_t>(i)]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(targets.size());
}

template <class T>
LossResult<T> ar_loss(const ModelParams<T>& params, const tokenizer::OctupleSequence& midi,
                      std::span<const int> level1) {
  auto o = detail::ar_objective<T>(params, midi, level1, nullptr, T(1), nullptr);
  return {o.loss, std::move(o.logits), std::move(o.targets)};
}

template <class T>
LossResult<T> nar_loss(const ModelParams<T>& params, const tokenizer::OctupleSequence& midi,
                       const codec::CodecMatrix& target, const codec::CodecMatrix& prompt, int level) {
  auto o = detail::nar_objective<T>(params, midi, target, prompt, level, nullptr, T(1), nullptr);
  return {o.loss, std::move(o.logits), std::move(o.targets)};
}

template <class T>
double cross_entropy(const Mat<T>& logits, std::span<const int> targets, Mat<T>* grad) {
  return detail::cross_entropy(logits, targets, grad);
}

template struct LossResult<float>;
template struct LossResult<double>;
template LossResult<float> ar_loss(const ModelParams<float>&, const tokenizer::OctupleSequence&, std::span<const int>);
template LossResult<double> ar_loss(const ModelParams<double>&, const tokenizer::OctupleSequence&,
                                    std::span<const int>);
template LossResult<float> nar_loss(const ModelParams<float>&, const tokenizer::OctupleSequence&,
                                    const codec::CodecMatrix&, const codec::CodecMatrix&, int);
template LossResult<double> nar_loss(const ModelParams<double>&, const tokenizer::OctupleSequence&,
                                     const codec::CodecMatrix&, const codec::CodecMatrix&, int);
template double cross_entropy(const Mat<float>&, std::span<const int>, Mat<float>*);
template double cross_entropy(const Mat<double>&, std::span<const int>, Mat<double>*);

}  // namespace pianolm::lm
