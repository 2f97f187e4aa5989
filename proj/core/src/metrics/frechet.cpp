#include <cmath>

#include <Eigen/Eigenvalues>

#include "pianolm/error.hpp"
#include "pianolm/metrics/metrics.hpp"

namespace pianolm::metrics {
namespace {

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  const Eigen::VectorXd roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose();
}

double trace_sqrt_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::MatrixXd root_a = psd_sqrt(a);
  Eigen::MatrixXd inner = root_a * b * root_a;
  inner = 0.5 * (inner + inner.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(inner, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
}

}  // namespace

EmbeddingStats embedding_stats(const std::vector<codec::FeatureMatrix>& features) {
  Eigen::Index dim = -1;
  Eigen::Index count = 0;
  for (const auto& f : features) {
    if (f.length() == 0) continue;
    if (dim >= 0 && f.dim() != dim) throw InvalidArgument("feature matrices disagree on dimension");
    dim = f.dim();
    count += f.length();
  }
  if (count < 2) throw InvalidArgument("embedding statistics need at least 2 frames, got " + std::to_string(count));

  EmbeddingStats out;
  out.count = count;
  out.mean = Eigen::VectorXd::Zero(dim);
  for (const auto& f : features)
    if (f.length() > 0) out.mean += f.frames.colwise().sum().transpose();
  out.mean /= static_cast<double>(count);

  out.covariance = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& f : features) {
    if (f.length() == 0) continue;
    const Eigen::MatrixXd centered = f.frames.rowwise() - out.mean.transpose();
    out.covariance.noalias() += centered.transpose() * centered;
  }
  out.covariance /= static_cast<double>(count - 1);
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  return out;
}

double frechet_distance(const EmbeddingStats& a, const EmbeddingStats& b) {
  if (a.dim() != b.dim()) throw InvalidArgument("embedding dimensions differ");
  if (a.covariance.rows() != a.dim() || b.covariance.rows() != b.dim())
    throw InvalidArgument("covariance shape does not match mean");
  if (!a.mean.allFinite() || !b.mean.allFinite() || !a.covariance.allFinite() || !b.covariance.allFinite())
    throw InvalidArgument("non-finite embedding statistics");

  if (a.mean == b.mean && a.covariance == b.covariance) return 0.0;
  const double mean_term = (a.mean - b.mean).squaredNorm();
  const double traces = a.covariance.trace() + b.covariance.trace();
  const double cross = 0.5 * (trace_sqrt_product(a.covariance, b.covariance) +
                              trace_sqrt_product(b.covariance, a.covariance));
  return std::max(0.0, mean_term + traces - 2.0 * cross);
}

}  // namespace pianolm::metrics
