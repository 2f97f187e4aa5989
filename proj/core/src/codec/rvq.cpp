#include "pianolm/codec/rvq.hpp"

#include <algorithm>
#include <numeric>

#include "pianolm/error.hpp"

namespace pianolm::codec {
namespace {

RowMatrixXd stack_frames(const std::vector<FeatureMatrix>& corpus) {
  Eigen::Index rows = 0;
  Eigen::Index dim = -1;
  for (const auto& f : corpus) {
    if (f.length() == 0) continue;
    if (dim >= 0 && f.dim() != dim) throw InvalidArgument("corpus feature matrices disagree on dimension");
    dim = f.dim();
    rows += f.length();
  }
  RowMatrixXd out(rows, std::max<Eigen::Index>(dim, 0));
  Eigen::Index at = 0;
  for (const auto& f : corpus) {
    if (f.length() == 0) continue;
    out.middleRows(at, f.length()) = f.frames;
    at += f.length();
  }
  return out;
}

Eigen::Index count_distinct(const RowMatrixXd& points, Eigen::Index stop_at) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(points.rows()));
  std::iota(order.begin(), order.end(), 0);
  auto row_less = [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
      if (points(a, j) != points(b, j)) return points(a, j) < points(b, j);
    }
    return false;
  };
  std::sort(order.begin(), order.end(), row_less);
  Eigen::Index distinct = order.empty() ? 0 : 1;
  for (std::size_t i = 1; i < order.size() && distinct < stop_at; ++i)
    if (row_less(order[i - 1], order[i])) ++distinct;
  return distinct;
}

std::uint64_t level_seed(std::uint64_t seed, int level) {
  // splitmix64 step keeps per-level streams decorrelated
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(level + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Subtracts each frame's nearest centroid in place, returns mean squared residual.
double quantize_residual(RowMatrixXd& residual, const RowMatrixXf& centroids) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < residual.rows(); ++i) {
    const int idx = nearest_centroid(residual.row(i), centroids);
    residual.row(i) -= centroids.row(idx).cast<double>();
    total += residual.row(i).squaredNorm();
  }
  return residual.rows() > 0 ? total / static_cast<double>(residual.rows()) : 0.0;
}

}  // namespace

RvqCodebooks train_rvq(const std::vector<FeatureMatrix>& corpus, const RvqTrainOptions& options) {
  if (options.levels < 1) throw InvalidArgument("RVQ needs at least one level");
  if (options.codebook_size < 1) throw InvalidArgument("codebook size must be positive");
  RowMatrixXd residual = stack_frames(corpus);
  const auto k = options.codebook_size;
  if (residual.rows() < k)
    throw InvalidArgument("corpus has " + std::to_string(residual.rows()) + " frames, fewer than codebook size " +
                          std::to_string(k));
  if (!options.allow_degenerate) {
    const auto distinct = count_distinct(residual, k);
    if (distinct < k)
      throw InvalidArgument("corpus has only " + std::to_string(distinct) +
                            " distinct frames; use a codebook size of at most " + std::to_string(distinct));
  }

  RvqCodebooks out;
  for (int level = 0; level < options.levels; ++level) {
    KMeansOptions km;
    km.max_iterations = options.max_iterations;
    km.tolerance = options.tolerance;
    km.seed = level_seed(options.seed, level);
    km.pin_zero_centroid = level > 0;
    const auto fit = kmeans(residual, k, km);
    RowMatrixXf centroids = fit.centroids.cast<float>();
    const double distortion = quantize_residual(residual, centroids);
    out.levels.push_back(std::move(centroids));
    out.stats.push_back({fit.iterations, distortion});
  }
  return out;
}

void refine_rvq(RvqCodebooks& codebooks, const std::vector<FeatureMatrix>& corpus, int iterations) {
  RowMatrixXd residual = stack_frames(corpus);
  if (residual.rows() == 0) return;
  if (residual.cols() != codebooks.dim()) throw InvalidArgument("refinement corpus dimension mismatch");
  for (int level = 0; level < codebooks.level_count(); ++level) {
    KMeansOptions km;
    km.max_iterations = iterations;
    km.tolerance = 0.0;
    km.pin_zero_centroid = level > 0;
    auto& cb = codebooks.levels[static_cast<std::size_t>(level)];
    const auto fit = kmeans_refine(residual, cb.cast<double>(), km);
    cb = fit.centroids.cast<float>();
    auto& stats = codebooks.stats[static_cast<std::size_t>(level)];
    stats.iterations += fit.iterations;
    stats.distortion = quantize_residual(residual, cb);
  }
}

CodecMatrix CodecMatrix::slice(Eigen::Index begin, Eigen::Index end) const {
  if (begin < 0 || end > frames_ || begin > end) throw InvalidArgument("codec slice out of range");
  CodecMatrix out(end - begin, levels_, codebook_size_);
  for (Eigen::Index t = begin; t < end; ++t)
    for (int l = 0; l < levels_; ++l) out.set(t - begin, l, at(t, l));
  return out;
}

CodecMatrix rvq_encode(const FeatureMatrix& features, const RvqCodebooks& codebooks) {
  if (codebooks.level_count() == 0) throw InvalidArgument("empty codebooks");
  if (features.dim() != codebooks.dim())
    throw InvalidArgument("feature dimension " + std::to_string(features.dim()) +
                          " does not match codebook dimension " + std::to_string(codebooks.dim()));
  CodecMatrix out(features.length(), codebooks.level_count(), codebooks.codebook_size());
  Eigen::RowVectorXd residual(features.dim());
  for (Eigen::Index t = 0; t < features.length(); ++t) {
    residual = features.frames.row(t);
    for (int l = 0; l < codebooks.level_count(); ++l) {
      const auto& cb = codebooks.levels[static_cast<std::size_t>(l)];
      const int idx = nearest_centroid(residual, cb);
      out.set(t, l, idx);
      residual -= cb.row(idx).cast<double>();
    }
  }
  return out;
}

FeatureMatrix rvq_decode(const CodecMatrix& codes, const RvqCodebooks& codebooks) {
  return rvq_decode(codes, codebooks, codes.levels());
}

FeatureMatrix rvq_decode(const CodecMatrix& codes, const RvqCodebooks& codebooks, int levels) {
  if (levels < 0 || levels > codes.levels() || levels > codebooks.level_count())
    throw InvalidArgument("cannot decode " + std::to_string(levels) + " levels");
  FeatureMatrix out;
  out.frames = RowMatrixXd::Zero(codes.frames(), codebooks.dim());
  for (Eigen::Index t = 0; t < codes.frames(); ++t) {
    for (int l = 0; l < levels; ++l) {
      const auto& cb = codebooks.levels[static_cast<std::size_t>(l)];
      const auto idx = codes.at(t, l);
      if (idx < 0 || idx >= cb.rows())
        throw InvalidArgument("codec index " + std::to_string(idx) + " out of range at (frame " +
                              std::to_string(t) + ", level " + std::to_string(l + 1) + ")");
      out.frames.row(t) += cb.row(idx).cast<double>();
    }
  }
  return out;
}

}  // namespace pianolm::codec
