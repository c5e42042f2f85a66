#pragma once

// Maps from densities (and, through D, from warping functions) into L2(T):
// square-root velocity with tangent projection, centred log-ratio, log-hazard
// and log-quantile density. Every map comes with an inverse.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "warpfda/error.hpp"
#include "warpfda/grid_function.hpp"
#include "warpfda/warping.hpp"

namespace warpfda {

// ---------------------------------------------------------------------------
// Square-root velocity functions and the tangent space at a reference SRVF
// ---------------------------------------------------------------------------

inline constexpr double srvf_norm_tolerance = 1e-6;
inline constexpr double tangency_tolerance = 1e-6;
/// Below this angle (or tangent norm) the l'Hopital completions are used.
inline constexpr double small_angle = 1e-8;

/// Nonnegative function with squared norm eta: a point of the positive
/// orthant of the sphere of radius sqrt(eta) in L2(T).
class Srvf {
public:
  static Srvf validate(const GridFunction& raw) {
    if (raw.min() < 0.0) {
      throw ValidationError("SRVF has negative values");
    }
    const double eta = raw.grid().eta();
    const double sq = squared_norm(raw);
    if (std::abs(sq - eta) > srvf_norm_tolerance * eta) {
      throw ValidationError("SRVF squared norm " + std::to_string(sq) + " differs from eta " +
                            std::to_string(eta));
    }
    return Srvf(raw);
  }

  /// q0 = 1, the SRVF of the identity warping.
  static Srvf identity(const GridPtr& grid) { return Srvf(GridFunction::constant(grid, 1.0)); }

  const GridFunction& function() const noexcept { return inner_; }
  const Grid& grid() const noexcept { return inner_.grid(); }

private:
  explicit Srvf(GridFunction inner) : inner_(std::move(inner)) {}

  GridFunction inner_;
};

/// Element of the tangent space at mu: <v, mu> = 0 (absolute tolerance 1e-6).
class TangentVector {
public:
  TangentVector(GridFunction values, Srvf mu) : values_(std::move(values)), mu_(std::move(mu)) {
    const double ip = inner_product(values_, mu_.function());
    if (std::abs(ip) > tangency_tolerance) {
      throw ValidationError("vector is not tangent at mu: <v, mu> = " + std::to_string(ip));
    }
  }

  const GridFunction& function() const noexcept { return values_; }
  const Srvf& mu() const noexcept { return mu_; }

private:
  GridFunction values_;
  Srvf mu_;
};

struct TangentProjection {
  TangentVector vector;
  double theta;
  /// q is numerically orthogonal to mu (theta within 1e-8 of pi/2).
  bool degenerate;
};

/// Result of mapping a tangent vector back onto the sphere. Nonnegativity is
/// not guaranteed, the flag reports it.
struct SpherePoint {
  GridFunction function;
  bool in_positive_orthant;
};

/// Necessary conditions for v to lie in the image of the tangent projection.
struct ImageDiagnostics {
  double norm_v;
  double min_value;
  bool theta_bound_ok;  // ||v|| <= pi/2
  bool pointwise_ok;    // v(t) >= -mu(t) / sqrt(eta); for mu = 1 this is -1/sqrt(eta)
  bool tangency_ok;     // <v, mu> = 0

  bool all() const noexcept { return theta_bound_ok && pointwise_ok && tangency_ok; }
};

inline Srvf srvf_from_density(const DensityFunction& f) {
  return Srvf::validate(f.function().map([](double x) { return std::sqrt(x); }));
}

inline Srvf srvf_forward(const WarpingFunction& gamma) {
  return srvf_from_density(derivative_D(gamma));
}

inline TangentProjection tangent_project(const Srvf& q, const Srvf& mu, WarningLog* log = nullptr) {
  const GridFunction& qf = q.function();
  const GridFunction& mf = mu.function();
  const double eta = qf.grid().eta();
  const double cos_theta = std::clamp(inner_product(qf, mf) / eta, -1.0, 1.0);
  const double theta = std::acos(cos_theta);
  const bool degenerate = std::abs(theta - std::numbers::pi / 2) < small_angle;
  if (degenerate) {
    emit(log, WarningKind::degenerate_tangent,
         "q is orthogonal to mu; it corresponds to a stepwise constant warping");
  }
  const double root_eta = std::sqrt(eta);
  GridFunction v = (theta < small_angle)
                       ? (1.0 / root_eta) * (qf - mf)
                       : (theta / (root_eta * std::sin(theta))) * (qf - cos_theta * mf);
  return TangentProjection{TangentVector(std::move(v), mu), theta, degenerate};
}

inline SpherePoint tangent_inverse(const TangentVector& v) {
  const GridFunction& vf = v.function();
  const GridFunction& mf = v.mu().function();
  const double len = norm(vf);
  GridFunction s = (len < small_angle)
                       ? mf
                       : std::cos(len) * mf + (std::sqrt(vf.grid().eta()) * std::sin(len) / len) * vf;
  const bool positive = s.min() >= 0.0;
  return SpherePoint{std::move(s), positive};
}

/// gamma(t) = a + integral of s^2, with s^2 floored at 1e-12 so the result
/// is strictly increasing. Accepts any s on the sphere, including points
/// outside the positive orthant.
inline WarpingFunction srvf_inverse(const GridFunction& s) {
  const double eta = s.grid().eta();
  const double sq = squared_norm(s);
  if (std::abs(sq - eta) > srvf_norm_tolerance * eta) {
    throw ValidationError("function is not on the sphere: squared norm " + std::to_string(sq));
  }
  return inverse_D(multiply(s, s));
}

inline ImageDiagnostics check_image_membership(const TangentVector& v) {
  const GridFunction& vf = v.function();
  const GridFunction& mf = v.mu().function();
  const double inv_root_eta = 1.0 / std::sqrt(vf.grid().eta());
  ImageDiagnostics d{};
  d.norm_v = norm(vf);
  d.min_value = vf.min();
  d.theta_bound_ok = d.norm_v <= std::numbers::pi / 2 + 1e-12;
  d.pointwise_ok = true;
  for (std::size_t j = 0; j < vf.size(); ++j) {
    if (vf[j] < -inv_root_eta * mf[j] - 1e-8) {
      d.pointwise_ok = false;
      break;
    }
  }
  d.tangency_ok = std::abs(inner_product(vf, mf)) <= tangency_tolerance;
  return d;
}

// ---------------------------------------------------------------------------
// Bayes space B2(T) and the centred log-ratio transform
// ---------------------------------------------------------------------------

/// Density values below floor_factor * eta are raised before taking logs.
inline constexpr double log_floor_factor = 1e-10;

namespace detail {

inline GridFunction floored_log(const DensityFunction& f, const char* what, WarningLog* log) {
  const double floor = log_floor_factor * f.grid().eta();
  std::size_t floored = 0;
  GridFunction out = f.function().map([&](double x) {
    if (x < floor) {
      ++floored;
      x = floor;
    }
    return std::log(x);
  });
  if (floored > 0) {
    emit(log, WarningKind::density_floored,
         std::string(what) + ": " + std::to_string(floored) + " density value(s) raised to " +
             std::to_string(floor));
  }
  return out;
}

/// eta * exp(v) / integral(exp(v)), shifted by max(v) against overflow.
inline DensityFunction normalized_exp(const GridFunction& v) {
  const double top = v.max();
  return DensityFunction::normalize(v.map([top](double x) { return std::exp(x - top); }));
}

}  // namespace detail

/// psi_B(f) = log f - (1/eta) * integral(log f). The result integrates to 0.
inline GridFunction clr_forward(const DensityFunction& f, WarningLog* log = nullptr) {
  GridFunction lf = detail::floored_log(f, "clr", log);
  const double centre = integrate(lf) / f.grid().eta();
  return lf.map([centre](double x) { return x - centre; });
}

/// psi_B^{-1}(v) = eta * exp(v) / integral(exp(v)); defined for every finite v.
inline DensityFunction clr_inverse(const GridFunction& v) { return detail::normalized_exp(v); }

/// Perturbation f (+) g: pointwise product rescaled to mass eta.
inline DensityFunction bayes_perturb(const DensityFunction& f, const DensityFunction& g) {
  return DensityFunction::normalize(multiply(f.function(), g.function()));
}

/// Powering alpha (.) f: f^alpha rescaled to mass eta.
inline DensityFunction bayes_power(double alpha, const DensityFunction& f) {
  const double floor = log_floor_factor * f.grid().eta();
  return DensityFunction::normalize(
      f.function().map([alpha, floor](double x) { return std::pow(std::max(x, floor), alpha); }));
}

/// Bayes-space inner product, evaluated through the clr isometry.
inline double bayes_inner(const DensityFunction& f, const DensityFunction& g) {
  return inner_product(clr_forward(f), clr_forward(g));
}

// ---------------------------------------------------------------------------
// Log-hazard transform on [a, b - delta*eta]
// ---------------------------------------------------------------------------

inline void validate_delta(double delta) {
  if (!(delta > 0.0 && delta <= 0.5)) {
    throw ParameterError("log-hazard threshold delta must lie in (0, 0.5], got " +
                         std::to_string(delta));
  }
}

/// Largest index j with t_j <= b - delta*eta.
inline std::size_t hazard_cutoff_index(const Grid& grid, double delta) {
  validate_delta(delta);
  const double cut = grid.b() - delta * grid.eta() + 1e-12 * grid.eta();
  const auto t = grid.points();
  const auto it = std::upper_bound(t.begin(), t.end(), cut);
  const auto count = static_cast<std::size_t>(it - t.begin());
  if (count < 2) {
    throw ParameterError("log-hazard cutoff leaves fewer than two grid points");
  }
  return count - 1;
}

/// psi_H(f) = log(f_s / (1 - F)) on [a, b - delta*eta] with f_s = f/eta and
/// F = (gamma - a)/eta; extended by its last value up to b.
inline GridFunction log_hazard_forward(const DensityFunction& f, double delta,
                                       WarningLog* log = nullptr) {
  const Grid& grid = f.grid();
  const std::size_t cut = hazard_cutoff_index(grid, delta);
  const double eta = grid.eta();
  const GridFunction cdf = cumulative_integral(f.function());
  const GridFunction lf = detail::floored_log(f, "log-hazard", log);
  std::vector<double> out(f.size());
  for (std::size_t j = 0; j <= cut; ++j) {
    const double survival = 1.0 - cdf[j] / eta;
    if (!(survival > 0.0)) {
      throw HazardOverflowError("distribution function reaches 1 before the hazard cutoff (index " +
                                std::to_string(j) + ")");
    }
    out[j] = lf[j] - std::log(eta) - std::log(survival);
  }
  std::fill(out.begin() + static_cast<std::ptrdiff_t>(cut) + 1, out.end(), out[cut]);
  return f.function().with_values(std::move(out));
}

/// Inverse of log_hazard_forward. Survival follows the trapezoidal recursion
/// S' = -lambda S, which is the exact discrete inverse of the forward map; the
/// tail (b - delta*eta, b] receives the remaining mass as a constant density.
inline DensityFunction log_hazard_inverse(const GridFunction& h, double delta) {
  const Grid& grid = h.grid();
  const std::size_t cut = hazard_cutoff_index(grid, delta);
  const double eta = grid.eta();
  const auto t = grid.points();
  std::vector<double> f(h.size());
  double survival = 1.0;
  double rate = std::exp(h[0]);
  f[0] = eta * rate;
  for (std::size_t j = 0; j < cut; ++j) {
    const double step = t[j + 1] - t[j];
    const double next_rate = std::exp(h[j + 1]);
    const double shrink = 1.0 - 0.5 * step * rate;
    if (!(shrink > 0.0) || !std::isfinite(next_rate)) {
      throw HazardOverflowError("reconstructed distribution function reaches 1 at index " +
                                std::to_string(j + 1) + ", before the cutoff");
    }
    survival *= shrink / (1.0 + 0.5 * step * next_rate);
    rate = next_rate;
    f[j + 1] = eta * rate * survival;
  }
  const double first_tail_step = t[cut + 1] - t[cut];
  const double tail_width = 0.5 * first_tail_step + (grid.b() - t[cut + 1]);
  const double level = (eta * survival - 0.5 * first_tail_step * f[cut]) / tail_width;
  std::fill(f.begin() + static_cast<std::ptrdiff_t>(cut) + 1, f.end(), std::max(level, 0.0));
  return DensityFunction::normalize(h.with_values(std::move(f)));
}

// ---------------------------------------------------------------------------
// Log-quantile density transform
// ---------------------------------------------------------------------------

/// Uniform probability grid on [0, 1] with n points.
inline GridPtr probability_grid(std::size_t n) { return Grid::uniform(0.0, 1.0, n); }

/// psi_Q(f)(p) = -log f(Q(p)), on a uniform probability grid of the same
/// length. Q is the monotone linear inverse of F; f(Q(p)) is obtained as
/// eta / Q'(p) with Q' from finite differences on the probability grid.
inline GridFunction log_quantile_forward(const DensityFunction& f) {
  const Grid& grid = f.grid();
  const std::size_t n = f.size();
  const double eta = grid.eta();
  const GridFunction cum = cumulative_integral(f.function());
  std::vector<double> cdf(n);
  for (std::size_t j = 0; j < n; ++j) {
    cdf[j] = cum[j] / cum.back();
    if (j > 0 && !(cdf[j] > cdf[j - 1])) {
      throw QuantileInversionError("distribution function is flat at index " + std::to_string(j) +
                                   "; quantile function is not differentiable");
    }
  }
  const GridPtr pgrid = probability_grid(n);
  const auto p = pgrid->points();
  std::vector<double> quantile(n);
  for (std::size_t j = 0; j < n; ++j) {
    quantile[j] = interpolate(cdf, grid.points(), p[j]);
  }
  quantile.front() = grid.a();
  quantile.back() = grid.b();
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t lo = (j == 0) ? 0 : j - 1;
    const std::size_t hi = (j + 1 == n) ? j : j + 1;
    const double slope = (quantile[hi] - quantile[lo]) / (p[hi] - p[lo]);
    if (!(slope > 0.0)) {
      throw QuantileInversionError("quantile function is flat at probability index " +
                                   std::to_string(j));
    }
    out[j] = std::log(slope / eta);
  }
  return GridFunction(pgrid, std::move(out));
}

/// Warping function recovered from a log-quantile density u: the quantile
/// density exp(u) is integrated to Q (mapped onto [a, b]) and Q is inverted
/// by monotone linear interpolation onto `target`.
inline WarpingFunction log_quantile_inverse_warping(const GridFunction& u, const GridPtr& target) {
  if (u.size() != target->size()) {
    throw GridMismatchError();
  }
  const double top = u.max();
  const GridFunction cum = cumulative_integral(u.map([top](double x) { return std::exp(x - top); }));
  const double a = target->a();
  const double eta = target->eta();
  std::vector<double> quantile(u.size());
  for (std::size_t j = 0; j < quantile.size(); ++j) {
    quantile[j] = a + eta * cum[j] / cum.back();
  }
  const auto p = u.grid().points();
  const double p0 = p.front();
  const double pspan = p.back() - p.front();
  std::vector<double> values(u.size());
  for (std::size_t j = 0; j < values.size(); ++j) {
    const double prob = (interpolate(quantile, p, target->point(j)) - p0) / pspan;
    values[j] = a + eta * prob;
  }
  return WarpingFunction::from_monotone(target, std::move(values));
}

inline DensityFunction log_quantile_inverse(const GridFunction& u, const GridPtr& target) {
  return derivative_D(log_quantile_inverse_warping(u, target));
}

// ---------------------------------------------------------------------------
// Unified transforms Psi = psi o D
// ---------------------------------------------------------------------------

enum class TransformKind { srvf_tangent, clr, log_hazard, log_quantile };

inline std::string_view to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::srvf_tangent: return "srvf";
    case TransformKind::clr: return "clr";
    case TransformKind::log_hazard: return "log-hazard";
    case TransformKind::log_quantile: return "log-quantile";
  }
  return "unknown";
}

inline TransformKind parse_transform_kind(std::string_view name) {
  if (name == "srvf" || name == "srvf-tangent") return TransformKind::srvf_tangent;
  if (name == "clr") return TransformKind::clr;
  if (name == "log-hazard") return TransformKind::log_hazard;
  if (name == "log-quantile") return TransformKind::log_quantile;
  throw ParameterError("unknown transform '" + std::string(name) +
                       "' (expected srvf, clr, log-hazard or log-quantile)");
}

/// Which psi to use, with its parameters: the SRVF reference mu (q0 = 1 when
/// unset) and the log-hazard threshold delta.
struct TransformId {
  TransformKind kind = TransformKind::clr;
  std::optional<GridFunction> mu;
  double delta = 0.05;

  static TransformId srvf(std::optional<GridFunction> mu = std::nullopt) {
    return TransformId{TransformKind::srvf_tangent, std::move(mu), 0.05};
  }
  static TransformId clr() { return TransformId{TransformKind::clr, std::nullopt, 0.05}; }
  static TransformId log_hazard(double delta = 0.05) {
    validate_delta(delta);
    return TransformId{TransformKind::log_hazard, std::nullopt, delta};
  }
  static TransformId log_quantile() {
    return TransformId{TransformKind::log_quantile, std::nullopt, 0.05};
  }

  void validate() const {
    if (kind == TransformKind::log_hazard) {
      validate_delta(delta);
    }
    if (mu) {
      Srvf::validate(*mu);
    }
  }

  /// Reference SRVF on `grid`.
  Srvf reference(const GridPtr& grid) const {
    if (!mu) {
      return Srvf::identity(grid);
    }
    if (!same_grid(mu->grid(), *grid)) {
      throw GridMismatchError();
    }
    return Srvf::validate(*mu);
  }
};

/// psi applied to a density.
inline GridFunction transform_density(const DensityFunction& f, const TransformId& id,
                                      WarningLog* log = nullptr) {
  switch (id.kind) {
    case TransformKind::srvf_tangent:
      return tangent_project(srvf_from_density(f), id.reference(f.grid_ptr()), log)
          .vector.function();
    case TransformKind::clr: return clr_forward(f, log);
    case TransformKind::log_hazard: return log_hazard_forward(f, id.delta, log);
    case TransformKind::log_quantile: return log_quantile_forward(f);
  }
  throw ParameterError("unknown transform");
}

/// psi^{-1}: back to a density on `grid` (the warping grid).
inline DensityFunction inverse_transform_density(const GridFunction& v, const TransformId& id,
                                                 const GridPtr& grid) {
  switch (id.kind) {
    case TransformKind::srvf_tangent: {
      const SpherePoint s = tangent_inverse(TangentVector(v, id.reference(grid)));
      return DensityFunction::normalize(multiply(s.function, s.function));
    }
    case TransformKind::clr: return clr_inverse(v);
    case TransformKind::log_hazard: return log_hazard_inverse(v, id.delta);
    case TransformKind::log_quantile: return log_quantile_inverse(v, grid);
  }
  throw ParameterError("unknown transform");
}

/// Psi(gamma) = psi(D gamma).
inline GridFunction transform(const WarpingFunction& gamma, const TransformId& id,
                              WarningLog* log = nullptr) {
  return transform_density(derivative_D(gamma), id, log);
}

/// Psi^{-1}(v) = D^{-1}(psi^{-1}(v)); always a valid warping on `grid`.
inline WarpingFunction inverse_transform(const GridFunction& v, const TransformId& id,
                                         const GridPtr& grid) {
  switch (id.kind) {
    case TransformKind::srvf_tangent: {
      const SpherePoint s = tangent_inverse(TangentVector(v, id.reference(grid)));
      return srvf_inverse(s.function);
    }
    case TransformKind::log_quantile: return log_quantile_inverse_warping(v, grid);
    case TransformKind::clr:
    case TransformKind::log_hazard: return inverse_D(inverse_transform_density(v, id, grid));
  }
  throw ParameterError("unknown transform");
}

}  // namespace warpfda
