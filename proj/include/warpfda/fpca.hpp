#pragma once

// Functional PCA on a grid: the covariance operator is discretized as
// W^{1/2} K W^{1/2} with K the sample covariance over grid points and W the
// trapezoidal weights, so eigenfunctions are orthonormal in the quadrature
// inner product.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "warpfda/error.hpp"
#include "warpfda/grid_function.hpp"

namespace warpfda {

namespace detail {

/// Output of a weighted PCA on rows of a data matrix.
struct WeightedPca {
  Eigen::VectorXd mean;
  Eigen::VectorXd eigenvalues;   // descending, clipped at 0
  Eigen::MatrixXd components;    // columns, unit norm in the weighted inner product
  Eigen::MatrixXd scores;        // rows = samples
  double total_variance = 0.0;   // trace of the weighted covariance
};

/// Flips each component so that the first non-negligible weighted moment
/// sum_j w_j s_j^r phi_j (r = 0, 1, 2, ...) is positive, where s is the
/// position rescaled to [0, 1]. Falls back to the first nonzero value.
inline void fix_signs(Eigen::MatrixXd& components, const Eigen::VectorXd& weights,
                      const Eigen::VectorXd& positions) {
  constexpr int max_moment = 8;
  const double span = positions(positions.size() - 1) - positions(0);
  const Eigen::VectorXd s = (positions.array() - positions(0)) / span;
  const double tol = 1e-8 * std::sqrt(weights.sum());
  for (Eigen::Index m = 0; m < components.cols(); ++m) {
    auto phi = components.col(m);
    double decide = 0.0;
    for (int r = 0; r <= max_moment && decide == 0.0; ++r) {
      const double moment = (weights.array() * s.array().pow(r) * phi.array()).sum();
      if (std::abs(moment) > tol) {
        decide = moment;
      }
    }
    for (Eigen::Index j = 0; j < phi.size() && decide == 0.0; ++j) {
      if (std::abs(phi(j)) > 1e-12) {
        decide = phi(j);
      }
    }
    if (decide < 0.0) {
      phi = -phi;
    }
  }
}

/// PCA of the rows of `data` under the inner product <x, y> = sum w_j x_j y_j.
/// Keeps min(N - 1, n) components (at least one). Covariance divisor is N.
inline WeightedPca weighted_pca(const Eigen::MatrixXd& data, const Eigen::VectorXd& weights,
                                const Eigen::VectorXd& positions) {
  const Eigen::Index n_samples = data.rows();
  const Eigen::Index n_points = data.cols();
  if (n_samples < 2) {
    throw InsufficientDataError("PCA needs at least 2 samples, got " + std::to_string(n_samples));
  }
  if ((weights.array() <= 0.0).any()) {
    throw ParameterError("quadrature weights must be positive");
  }
  WeightedPca out;
  out.mean = data.colwise().mean().transpose();
  const Eigen::MatrixXd centred = data.rowwise() - out.mean.transpose();
  const Eigen::VectorXd root_w = weights.array().sqrt();
  const Eigen::MatrixXd scaled =
      (centred * root_w.asDiagonal()) / std::sqrt(static_cast<double>(n_samples));
  const Eigen::MatrixXd cov = scaled.transpose() * scaled;
  out.total_variance = cov.trace();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("covariance eigendecomposition failed");
  }
  const Eigen::Index keep = std::max<Eigen::Index>(1, std::min(n_samples - 1, n_points));
  out.eigenvalues.resize(keep);
  out.components.resize(n_points, keep);
  for (Eigen::Index m = 0; m < keep; ++m) {
    const Eigen::Index src = n_points - 1 - m;  // solver sorts ascending
    out.eigenvalues(m) = std::max(0.0, solver.eigenvalues()(src));
    out.components.col(m) = solver.eigenvectors().col(src).array() / root_w.array();
  }
  fix_signs(out.components, weights, positions);
  out.scores = centred * weights.asDiagonal() * out.components;
  return out;
}

inline Eigen::VectorXd to_eigen(std::span<const double> xs) {
  return Eigen::Map<const Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

inline std::vector<double> to_vector(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace detail

/// Univariate FPCA fit. `scores` is N x M with M = eigenfunctions.size().
struct FpcaModel {
  GridFunction mean;
  std::vector<GridFunction> eigenfunctions;
  std::vector<double> eigenvalues;
  Eigen::MatrixXd scores;
  /// Integrated pointwise sample variance (divisor N).
  double total_variance = 0.0;

  std::size_t components() const noexcept { return eigenfunctions.size(); }
};

inline FpcaModel fit_fpca(std::span<const GridFunction> samples) {
  if (samples.size() < 2) {
    throw InsufficientDataError("FPCA needs at least 2 samples, got " +
                                std::to_string(samples.size()));
  }
  const GridFunction& first = samples.front();
  const Grid& grid = first.grid();
  Eigen::MatrixXd data(static_cast<Eigen::Index>(samples.size()),
                       static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    require_same_grid(first, samples[i]);
    data.row(static_cast<Eigen::Index>(i)) = detail::to_eigen(samples[i].values()).transpose();
  }
  const auto pca =
      detail::weighted_pca(data, detail::to_eigen(grid.weights()), detail::to_eigen(grid.points()));

  std::vector<GridFunction> phis;
  phis.reserve(static_cast<std::size_t>(pca.components.cols()));
  for (Eigen::Index m = 0; m < pca.components.cols(); ++m) {
    phis.push_back(first.with_values(detail::to_vector(pca.components.col(m))));
  }
  return FpcaModel{first.with_values(detail::to_vector(pca.mean)), std::move(phis),
                   detail::to_vector(pca.eigenvalues), pca.scores, pca.total_variance};
}

/// Out-of-sample scores <x - mean, phi_m> for every component.
inline std::vector<double> project_scores(const FpcaModel& model, const GridFunction& x) {
  const GridFunction centred = x - model.mean;
  std::vector<double> out;
  out.reserve(model.components());
  for (const auto& phi : model.eigenfunctions) {
    out.push_back(inner_product(centred, phi));
  }
  return out;
}

/// mean + sum_{m < M} scores[m] * phi_m.
inline GridFunction reconstruct(const FpcaModel& model, std::span<const double> scores,
                                std::size_t M) {
  if (M > model.components() || M > scores.size()) {
    throw TruncationError("cannot reconstruct with " + std::to_string(M) + " components; " +
                          std::to_string(model.components()) + " available");
  }
  std::vector<double> acc(model.mean.values().begin(), model.mean.values().end());
  for (std::size_t m = 0; m < M; ++m) {
    const auto phi = model.eigenfunctions[m].values();
    for (std::size_t j = 0; j < acc.size(); ++j) {
      acc[j] += scores[m] * phi[j];
    }
  }
  return model.mean.with_values(std::move(acc));
}

/// Scores of training sample i.
inline std::vector<double> training_scores(const FpcaModel& model, std::size_t i) {
  const auto row = model.scores.row(static_cast<Eigen::Index>(i));
  return std::vector<double>(row.begin(), row.end());
}

}  // namespace warpfda
