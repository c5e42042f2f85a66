#pragma once

// Joint PCA of amplitude and phase: bivariate functions z = (w, Psi(gamma))
// under the weighted inner product <z1, z2>_w = <w1, w2> + C^2 <v1, v2>.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "warpfda/error.hpp"
#include "warpfda/fpca.hpp"
#include "warpfda/golden_section.hpp"
#include "warpfda/grid_function.hpp"
#include "warpfda/transforms.hpp"
#include "warpfda/warping.hpp"

namespace warpfda {

/// A registered function w with its warping gamma, the transformed warping
/// v = Psi(gamma) and the observed curve x = w o gamma.
struct JointSample {
  GridFunction w;
  WarpingFunction gamma;
  GridFunction v;
  GridFunction x;

  /// Computes v with `id` and x by composition unless `observed` is given.
  static JointSample make(GridFunction w, WarpingFunction gamma, const TransformId& id,
                          std::optional<GridFunction> observed = std::nullopt) {
    require_same_grid(w, gamma.function());
    GridFunction v = transform(gamma, id);
    GridFunction x = observed ? std::move(*observed) : compose(w, gamma);
    require_same_grid(w, x);
    return JointSample{std::move(w), std::move(gamma), std::move(v), std::move(x)};
  }
};

struct JointComponent {
  GridFunction w;
  GridFunction v;
};

struct JointPcaModel {
  TransformId transform;
  double C = 1.0;
  GridFunction mean_w;
  GridFunction mean_v;
  std::vector<JointComponent> components;
  /// Eigenvalues nu_m, descending.
  std::vector<double> nus;
  /// N x M scores rho_im.
  Eigen::MatrixXd scores;
  double total_variance = 0.0;

  const GridPtr& warp_grid() const noexcept { return mean_w.grid_ptr(); }
  std::size_t size() const noexcept { return components.size(); }

  std::vector<double> sample_scores(std::size_t i) const {
    const auto row = scores.row(static_cast<Eigen::Index>(i));
    return std::vector<double>(row.begin(), row.end());
  }
};

inline double weighted_inner(const GridFunction& w1, const GridFunction& v1, const GridFunction& w2,
                             const GridFunction& v2, double C) {
  return inner_product(w1, w2) + C * C * inner_product(v1, v2);
}

/// Metric d((w1, gamma1), (w2, gamma2)) = ||z1 - z2||_w.
inline double joint_distance(const JointSample& s1, const JointSample& s2, double C) {
  const GridFunction dw = s1.w - s2.w;
  const GridFunction dv = s1.v - s2.v;
  return std::sqrt(std::max(0.0, weighted_inner(dw, dv, dw, dv, C)));
}

/// g^C: w on [a, b) followed by C*v shifted to start at b. The junction at b
/// is stored twice (left limit w(b), right value C*v(a)); evaluation at b
/// returns C*v(a).
inline GridFunction concatenate_g(const GridFunction& w, const GridFunction& v, double C) {
  if (w.size() != v.size()) {
    throw GridMismatchError();
  }
  std::vector<double> values(w.values().begin(), w.values().end());
  for (double x : v.values()) {
    values.push_back(C * x);
  }
  return GridFunction(Grid::join(w.grid(), v.grid()), std::move(values));
}

namespace detail {

inline void validate_weight(double C) {
  if (!(C > 0.0) || !std::isfinite(C)) {
    throw ParameterError("weight C must be positive and finite, got " + std::to_string(C));
  }
}

}  // namespace detail

/// Weighted bivariate PCA. Internally the PCA of z~ = (w, C v) on the product
/// grid with block trapezoidal weights; stored components have their v-block
/// divided by C so that ||phi_m||_w = 1.
inline JointPcaModel fit_joint(std::span<const JointSample> samples, const TransformId& id,
                               double C) {
  detail::validate_weight(C);
  if (samples.size() < 2) {
    throw InsufficientDataError("joint PCA needs at least 2 samples, got " +
                                std::to_string(samples.size()));
  }
  const JointSample& first = samples.front();
  const Grid& wgrid = first.w.grid();
  const Grid& vgrid = first.v.grid();
  const auto nw = static_cast<Eigen::Index>(wgrid.size());
  const auto nv = static_cast<Eigen::Index>(vgrid.size());

  Eigen::MatrixXd data(static_cast<Eigen::Index>(samples.size()), nw + nv);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    require_same_grid(first.w, samples[i].w);
    require_same_grid(first.v, samples[i].v);
    const auto row = static_cast<Eigen::Index>(i);
    data.row(row).head(nw) = detail::to_eigen(samples[i].w.values()).transpose();
    data.row(row).tail(nv) = C * detail::to_eigen(samples[i].v.values()).transpose();
  }
  Eigen::VectorXd weights(nw + nv);
  weights << detail::to_eigen(wgrid.weights()), detail::to_eigen(vgrid.weights());
  Eigen::VectorXd positions(nw + nv);
  positions << detail::to_eigen(wgrid.points()),
      (detail::to_eigen(vgrid.points()).array() + (wgrid.b() - vgrid.a())).matrix();

  const auto pca = detail::weighted_pca(data, weights, positions);

  JointPcaModel model{id,
                      C,
                      first.w.with_values(detail::to_vector(pca.mean.head(nw))),
                      first.v.with_values(detail::to_vector(pca.mean.tail(nv) / C)),
                      {},
                      detail::to_vector(pca.eigenvalues),
                      pca.scores,
                      pca.total_variance};
  for (Eigen::Index m = 0; m < pca.components.cols(); ++m) {
    const Eigen::VectorXd col = pca.components.col(m);
    model.components.push_back(JointComponent{
        first.w.with_values(detail::to_vector(col.head(nw))),
        first.v.with_values(detail::to_vector(col.tail(nv) / C)),
    });
  }
  return model;
}

/// Scores <z - mean, phi_m>_w of a (possibly new) sample.
inline std::vector<double> project_joint_scores(const JointPcaModel& model, const GridFunction& w,
                                                const GridFunction& v) {
  const GridFunction dw = w - model.mean_w;
  const GridFunction dv = v - model.mean_v;
  std::vector<double> out;
  out.reserve(model.size());
  for (const auto& phi : model.components) {
    out.push_back(weighted_inner(dw, dv, phi.w, phi.v, model.C));
  }
  return out;
}

/// Smallest M whose cumulative share of the eigenvalue sum exceeds tau.
inline std::size_t select_M(std::span<const double> nus, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw ParameterError("tau must lie in (0, 1), got " + std::to_string(tau));
  }
  double total = 0.0;
  for (double nu : nus) {
    if (nu < 0.0) {
      throw ParameterError("eigenvalues must be nonnegative");
    }
    total += nu;
  }
  if (!(total > 0.0)) {
    throw DegenerateError("all eigenvalues are zero; no component explains any variance");
  }
  double cumulative = 0.0;
  for (std::size_t m = 0; m < nus.size(); ++m) {
    cumulative += nus[m];
    if (cumulative / total > tau) {
      return m + 1;
    }
  }
  return nus.size();
}

struct JointReconstruction {
  GridFunction w_hat;
  GridFunction v_hat;
  WarpingFunction gamma_hat;
  GridFunction x_hat;
};

/// Truncated Karhunen-Loeve reconstruction with the first M components, mapped
/// back to an observed curve x_hat = w_hat o Psi^{-1}(v_hat).
inline JointReconstruction reconstruct_x(const JointPcaModel& model, std::span<const double> scores,
                                         std::size_t M) {
  if (M > model.size() || M > scores.size()) {
    throw TruncationError("cannot reconstruct with " + std::to_string(M) + " components; " +
                          std::to_string(model.size()) + " available");
  }
  std::vector<double> w(model.mean_w.values().begin(), model.mean_w.values().end());
  std::vector<double> v(model.mean_v.values().begin(), model.mean_v.values().end());
  for (std::size_t m = 0; m < M; ++m) {
    const auto pw = model.components[m].w.values();
    const auto pv = model.components[m].v.values();
    for (std::size_t j = 0; j < w.size(); ++j) {
      w[j] += scores[m] * pw[j];
    }
    for (std::size_t j = 0; j < v.size(); ++j) {
      v[j] += scores[m] * pv[j];
    }
  }
  GridFunction w_hat = model.mean_w.with_values(std::move(w));
  GridFunction v_hat = model.mean_v.with_values(std::move(v));
  WarpingFunction gamma_hat = inverse_transform(v_hat, model.transform, model.warp_grid());
  GridFunction x_hat = compose(w_hat, gamma_hat);
  return JointReconstruction{std::move(w_hat), std::move(v_hat), std::move(gamma_hat),
                             std::move(x_hat)};
}

/// (1/N) sum_i ||x_i - x_hat_i^[M]||^2 for the training samples.
inline double mean_reconstruction_error(std::span<const JointSample> samples,
                                        const JointPcaModel& model, std::size_t M) {
  double acc = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto rec = reconstruct_x(model, model.sample_scores(i), M);
    acc += squared_norm(samples[i].x - rec.x_hat);
  }
  return acc / static_cast<double>(samples.size());
}

struct WeightSearch {
  double lo = 1e-2;
  double hi = 1e2;
  /// Relative tolerance on C (the search runs on log C).
  double rel_tol = 1e-4;
};

struct OptimizedWeight {
  double C;
  double objective;
  std::size_t evaluations;
  /// The objective did not depend on C; C = 1 was returned.
  bool flat;
};

/// Weight minimizing the mean squared reconstruction error of the observed
/// curves with M components, by golden-section search over log C.
inline OptimizedWeight optimize_C(std::span<const JointSample> samples, const TransformId& id,
                                  std::size_t M, const WeightSearch& search = {}) {
  if (samples.size() < 2) {
    throw InsufficientDataError("weight optimization needs at least 2 samples");
  }
  if (!(search.lo > 0.0 && search.lo < search.hi)) {
    throw ParameterError("weight search needs 0 < C_min < C_max");
  }
  const double log_lo = std::log(search.lo);
  const double log_hi = std::log(search.hi);
  const auto to_C = [&](double log_c) {
    return log_c == log_lo ? search.lo : log_c == log_hi ? search.hi : std::exp(log_c);
  };
  double seen_min = std::numeric_limits<double>::infinity();
  double seen_max = -std::numeric_limits<double>::infinity();
  const auto objective = [&](double log_c) {
    double value;
    try {
      const JointPcaModel model = fit_joint(samples, id, to_C(log_c));
      value = mean_reconstruction_error(samples, model, M);
    } catch (const NumericalError&) {
      value = std::numeric_limits<double>::infinity();
    }
    if (std::isfinite(value)) {
      seen_min = std::min(seen_min, value);
      seen_max = std::max(seen_max, value);
    }
    return value;
  };
  const auto best =
      golden_section_minimize(objective, log_lo, log_hi, std::log1p(search.rel_tol));
  if (!std::isfinite(best.value)) {
    throw OptimizationError("reconstruction error is non-finite for every candidate weight");
  }
  if (seen_max - seen_min <= 1e-10 * std::max(std::abs(seen_max), 1e-300)) {
    const double neutral = std::clamp(1.0, search.lo, search.hi);
    return OptimizedWeight{neutral, best.value, best.evaluations, true};
  }
  return OptimizedWeight{to_C(best.x), best.value, best.evaluations, false};
}

/// Empirical Frechet mean under d: (mean of w, Psi^{-1}(mean of v)).
inline std::pair<GridFunction, WarpingFunction> frechet_mean(std::span<const JointSample> samples,
                                                             const TransformId& id) {
  if (samples.empty()) {
    throw InsufficientDataError("Frechet mean of an empty sample");
  }
  std::vector<GridFunction> ws;
  std::vector<GridFunction> vs;
  for (const auto& s : samples) {
    ws.push_back(s.w);
    vs.push_back(s.v);
  }
  GridFunction mean_w = pointwise_mean(ws);
  WarpingFunction mean_gamma = inverse_transform(pointwise_mean(vs), id, mean_w.grid_ptr());
  return {std::move(mean_w), std::move(mean_gamma)};
}

/// Empirical Frechet variance under d: integral of Var(w) + C^2 Var(v), with
/// divisor N.
inline double frechet_variance(std::span<const JointSample> samples, double C) {
  if (samples.size() < 2) {
    throw InsufficientDataError("Frechet variance needs at least 2 samples");
  }
  std::vector<GridFunction> ws;
  std::vector<GridFunction> vs;
  for (const auto& s : samples) {
    ws.push_back(s.w);
    vs.push_back(s.v);
  }
  return integrate(pointwise_variance(ws)) + C * C * integrate(pointwise_variance(vs));
}

struct VarianceDecomposition {
  double explained;  // sum of the first M eigenvalues
  double residual;   // sum of the remaining computed eigenvalues
  double ratio;      // explained / (explained + residual)
};

inline VarianceDecomposition variance_decomposition(const JointPcaModel& model, std::size_t M) {
  if (M > model.size()) {
    throw TruncationError("M = " + std::to_string(M) + " exceeds the " +
                          std::to_string(model.size()) + " computed components");
  }
  double explained = 0.0;
  double residual = 0.0;
  for (std::size_t m = 0; m < model.nus.size(); ++m) {
    (m < M ? explained : residual) += model.nus[m];
  }
  const double total = explained + residual;
  return VarianceDecomposition{explained, residual, total > 0.0 ? explained / total : 1.0};
}

}  // namespace warpfda
