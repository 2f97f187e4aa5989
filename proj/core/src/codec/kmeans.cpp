#include <cmath>
#include <limits>
#include <random>

#include "pianolm/codec/rvq.hpp"
#include "pianolm/error.hpp"

namespace pianolm::codec {
namespace {

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double squared_distance(const double* a, const double* b, Eigen::Index d) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double diff = a[i] - b[i];
    acc += diff * diff;
  }
  return acc;
}

struct Assignment {
  std::vector<int> index;
  std::vector<double> distance;
  double total = 0.0;
};

Assignment assign(const RowMatrixXd& points, const RowMatrixXd& centroids) {
  const auto n = points.rows();
  const auto k = centroids.rows();
  const auto d = points.cols();
  Assignment a;
  a.index.resize(static_cast<std::size_t>(n));
  a.distance.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < k; ++c) {
      const double dist = squared_distance(points.row(i).data(), centroids.row(c).data(), d);
      if (dist < best_d) {
        best_d = dist;
        best = static_cast<int>(c);
      }
    }
    a.index[static_cast<std::size_t>(i)] = best;
    a.distance[static_cast<std::size_t>(i)] = best_d;
    a.total += best_d;
  }
  return a;
}

RowMatrixXd kmeanspp(const RowMatrixXd& points, int k, const KMeansOptions& options) {
  const auto n = points.rows();
  const auto d = points.cols();
  std::mt19937_64 rng(options.seed);
  RowMatrixXd centroids = RowMatrixXd::Zero(k, d);
  std::vector<double> nearest(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());

  int first = 0;
  if (!options.pin_zero_centroid) {
    const auto pick = static_cast<Eigen::Index>(unit_uniform(rng) * static_cast<double>(n));
    centroids.row(0) = points.row(std::min(pick, n - 1));
  }
  auto absorb = [&](int c) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double dist = squared_distance(points.row(i).data(), centroids.row(c).data(), d);
      auto& cur = nearest[static_cast<std::size_t>(i)];
      if (dist < cur) cur = dist;
    }
  };
  absorb(first);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : nearest) total += v;
    Eigen::Index chosen = 0;
    if (total > 0.0) {
      const double target = unit_uniform(rng) * total;
      double acc = 0.0;
      chosen = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += nearest[static_cast<std::size_t>(i)];
        if (acc > target && nearest[static_cast<std::size_t>(i)] > 0.0) {
          chosen = i;
          break;
        }
      }
    } else {
      // every point coincides with an existing centroid
      chosen = static_cast<Eigen::Index>(unit_uniform(rng) * static_cast<double>(n));
      chosen = std::min(chosen, n - 1);
    }
    centroids.row(c) = points.row(chosen);
    absorb(c);
  }
  return centroids;
}

KMeansResult lloyd(const RowMatrixXd& points, RowMatrixXd centroids, const KMeansOptions& options) {
  const auto n = points.rows();
  const auto d = points.cols();
  const auto k = centroids.rows();
  if (options.pin_zero_centroid) centroids.row(0).setZero();

  KMeansResult result;
  Assignment a = assign(points, centroids);
  double prev = a.total;
  int iterations = 0;
  for (; iterations < options.max_iterations; ++iterations) {
    RowMatrixXd sums = RowMatrixXd::Zero(k, d);
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto c = a.index[static_cast<std::size_t>(i)];
      sums.row(c) += points.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    for (Eigen::Index c = 0; c < k; ++c) {
      if (options.pin_zero_centroid && c == 0) continue;
      const auto count = counts[static_cast<std::size_t>(c)];
      if (count > 0) {
        centroids.row(c) = sums.row(c) / static_cast<double>(count);
        continue;
      }
      // Reseed an empty cluster from the point farthest from its centroid.
      Eigen::Index far = 0;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (a.distance[static_cast<std::size_t>(i)] > far_d) {
          far_d = a.distance[static_cast<std::size_t>(i)];
          far = i;
        }
      }
      centroids.row(c) = points.row(far);
      a.distance[static_cast<std::size_t>(far)] = 0.0;
    }
    a = assign(points, centroids);
    const double cur = a.total;
    const bool converged = prev <= 0.0 || (prev - cur) / prev < options.tolerance;
    prev = cur;
    if (converged) {
      ++iterations;
      break;
    }
  }
  // Leave every non-pinned centroid at the exact mean of its final cluster.
  RowMatrixXd sums = RowMatrixXd::Zero(k, d);
  std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto c = a.index[static_cast<std::size_t>(i)];
    sums.row(c) += points.row(i);
    ++counts[static_cast<std::size_t>(c)];
  }
  bool moved = false;
  for (Eigen::Index c = 0; c < k; ++c) {
    if ((options.pin_zero_centroid && c == 0) || counts[static_cast<std::size_t>(c)] == 0) continue;
    const Eigen::RowVectorXd mean = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
    if (mean != centroids.row(c)) {
      centroids.row(c) = mean;
      moved = true;
    }
  }
  if (moved) a = assign(points, centroids);

  result.centroids = std::move(centroids);
  result.assignment = std::move(a.index);
  result.distortion = n > 0 ? a.total / static_cast<double>(n) : 0.0;
  result.iterations = iterations;
  return result;
}

}  // namespace

KMeansResult kmeans(const RowMatrixXd& points, int k, const KMeansOptions& options) {
  if (k <= 0) throw InvalidArgument("k-means needs k >= 1");
  if (points.rows() < k)
    throw InvalidArgument("k-means needs at least k=" + std::to_string(k) + " points, got " +
                          std::to_string(points.rows()));
  return lloyd(points, kmeanspp(points, k, options), options);
}

KMeansResult kmeans_refine(const RowMatrixXd& points, RowMatrixXd initial, const KMeansOptions& options) {
  if (initial.cols() != points.cols()) throw InvalidArgument("centroid dimension mismatch");
  if (points.rows() == 0) throw InvalidArgument("k-means refinement needs at least one point");
  return lloyd(points, std::move(initial), options);
}

int nearest_centroid(const Eigen::Ref<const Eigen::RowVectorXd>& point, const RowMatrixXf& centroids,
                     double* distance) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  const auto d = centroids.cols();
  for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      const double diff = point[i] - static_cast<double>(centroids(c, i));
      acc += diff * diff;
    }
    if (acc < best_d) {
      best_d = acc;
      best = static_cast<int>(c);
    }
  }
  if (distance) *distance = best_d;
  return best;
}

}  // namespace pianolm::codec
