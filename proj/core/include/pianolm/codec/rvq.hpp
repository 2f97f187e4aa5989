#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "pianolm/codec/spectral.hpp"

namespace pianolm::codec {

using RowMatrixXf = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct KMeansOptions {
  int max_iterations = 100;
  double tolerance = 1e-5;  // relative distortion improvement
  std::uint64_t seed = 0;
  /// Centroid 0 is fixed at the origin (used for residual levels).
  bool pin_zero_centroid = false;
};

struct KMeansResult {
  RowMatrixXd centroids;
  std::vector<int> assignment;
  double distortion = 0.0;  // mean squared distance to the assigned centroid
  int iterations = 0;
};

/// Lloyd's algorithm with k-means++ seeding. Ties resolve to the lowest
/// centroid index; empty clusters are reseeded from the farthest point.
KMeansResult kmeans(const RowMatrixXd& points, int k, const KMeansOptions& options);
/// Lloyd iterations warm-started from the given centroids.
KMeansResult kmeans_refine(const RowMatrixXd& points, RowMatrixXd initial, const KMeansOptions& options);

/// Index of the nearest row of centroids (squared Euclidean, lowest index on ties).
int nearest_centroid(const Eigen::Ref<const Eigen::RowVectorXd>& point, const RowMatrixXf& centroids,
                     double* distance = nullptr);

struct RvqLevelStats {
  int iterations = 0;
  double distortion = 0.0;  // mean squared residual after this level
};

struct RvqCodebooks {
  std::vector<RowMatrixXf> levels;  // each K x D
  std::vector<RvqLevelStats> stats;

  int level_count() const { return static_cast<int>(levels.size()); }
  int codebook_size() const { return levels.empty() ? 0 : static_cast<int>(levels[0].rows()); }
  int dim() const { return levels.empty() ? 0 : static_cast<int>(levels[0].cols()); }
};

struct RvqTrainOptions {
  int levels = 4;
  int codebook_size = 256;
  std::uint64_t seed = 0;
  int max_iterations = 100;
  double tolerance = 1e-5;
  /// Accept a level-1 corpus with fewer distinct frames than codebook_size;
  /// surplus centroids then duplicate existing ones.
  bool allow_degenerate = false;
};

/// Level 1 is fitted on raw frames; level l on the residuals left by levels
/// below it. Residual levels keep centroid 0 at the origin, which makes the
/// per-frame reconstruction error non-increasing in the number of levels.
RvqCodebooks train_rvq(const std::vector<FeatureMatrix>& corpus, const RvqTrainOptions& options);

/// Warm-started Lloyd refinement of every level on a new corpus.
void refine_rvq(RvqCodebooks& codebooks, const std::vector<FeatureMatrix>& corpus, int iterations);

class CodecMatrix {
public:
  CodecMatrix() = default;
  CodecMatrix(Eigen::Index frames, int levels, int codebook_size)
      : frames_(frames), levels_(levels), codebook_size_(codebook_size),
        data_(static_cast<std::size_t>(frames) * static_cast<std::size_t>(levels), 0) {}

  Eigen::Index frames() const noexcept { return frames_; }
  int levels() const noexcept { return levels_; }
  int codebook_size() const noexcept { return codebook_size_; }
  std::int32_t at(Eigen::Index t, int level) const { return data_[index(t, level)]; }
  void set(Eigen::Index t, int level, std::int32_t v) { data_[index(t, level)] = v; }
  const std::vector<std::int32_t>& data() const noexcept { return data_; }

  /// Frames [begin, end).
  CodecMatrix slice(Eigen::Index begin, Eigen::Index end) const;

  friend bool operator==(const CodecMatrix&, const CodecMatrix&) = default;

private:
  std::size_t index(Eigen::Index t, int level) const {
    return static_cast<std::size_t>(t) * static_cast<std::size_t>(levels_) + static_cast<std::size_t>(level);
  }

  Eigen::Index frames_ = 0;
  int levels_ = 0;
  int codebook_size_ = 0;
  std::vector<std::int32_t> data_;
};

CodecMatrix rvq_encode(const FeatureMatrix& features, const RvqCodebooks& codebooks);
FeatureMatrix rvq_decode(const CodecMatrix& codes, const RvqCodebooks& codebooks);
/// Decode using only the first `levels` columns.
FeatureMatrix rvq_decode(const CodecMatrix& codes, const RvqCodebooks& codebooks, int levels);

}  // namespace pianolm::codec
