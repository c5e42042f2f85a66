#pragma once

// The space of warping functions on T = [a, b], their densities, and the
// differential operator D between the two.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "warpfda/error.hpp"
#include "warpfda/grid_function.hpp"

namespace warpfda {

inline constexpr double endpoint_tolerance = 1e-10;
inline constexpr double density_mass_tolerance = 1e-8;

/// Endpoint-pinned, strictly increasing function T -> T.
class WarpingFunction {
public:
  /// Checks endpoint pinning (absolute tolerance 1e-10) and strict
  /// monotonicity at grid resolution. Endpoints are snapped to a and b.
  static WarpingFunction validate(const GridFunction& raw) {
    const Grid& grid = raw.grid();
    if (grid.junction()) {
      throw ParameterError("warping functions need a grid without a junction");
    }
    const std::size_t n = raw.size();
    std::vector<std::size_t> bad_ends;
    if (std::abs(raw.front() - grid.a()) > endpoint_tolerance) {
      bad_ends.push_back(0);
    }
    if (std::abs(raw.back() - grid.b()) > endpoint_tolerance) {
      bad_ends.push_back(n - 1);
    }
    if (!bad_ends.empty()) {
      std::string msg = "warping endpoints not pinned to [" + std::to_string(grid.a()) + ", " +
                        std::to_string(grid.b()) + "] at index";
      for (auto j : bad_ends) {
        msg += " " + std::to_string(j);
      }
      throw EndpointError(msg, std::move(bad_ends));
    }
    std::vector<double> values(raw.values().begin(), raw.values().end());
    values.front() = grid.a();
    values.back() = grid.b();
    std::vector<std::size_t> bad;
    for (std::size_t j = 1; j < n; ++j) {
      if (!(values[j] > values[j - 1])) {
        bad.push_back(j);
      }
    }
    if (!bad.empty()) {
      std::string msg = "warping not strictly increasing at index";
      for (std::size_t i = 0; i < std::min<std::size_t>(bad.size(), 8); ++i) {
        msg += " " + std::to_string(bad[i]);
      }
      if (bad.size() > 8) {
        msg += " ...";
      }
      throw MonotonicityError(msg, std::move(bad));
    }
    return WarpingFunction(raw.with_values(std::move(values)));
  }

  static WarpingFunction identity(const GridPtr& grid) {
    return WarpingFunction(GridFunction::sample(grid, [](double t) { return t; }));
  }

  /// Builds a warping from a non-decreasing profile that already spans
  /// [a, b] up to rounding: pins the endpoints and separates ties by one ulp.
  static WarpingFunction from_monotone(const GridPtr& grid, std::vector<double> values) {
    const double a = grid->a();
    const double b = grid->b();
    const std::size_t n = values.size();
    values.front() = a;
    values.back() = b;
    for (std::size_t j = 1; j + 1 < n; ++j) {
      values[j] = std::clamp(values[j], a, b);
      if (!(values[j] > values[j - 1])) {
        values[j] = std::nextafter(values[j - 1], std::numeric_limits<double>::infinity());
      }
    }
    for (std::size_t j = n - 1; j-- > 1;) {
      if (!(values[j] < values[j + 1])) {
        values[j] = std::nextafter(values[j + 1], -std::numeric_limits<double>::infinity());
      }
    }
    return validate(GridFunction(grid, std::move(values)));
  }

  const GridFunction& function() const noexcept { return inner_; }
  const Grid& grid() const noexcept { return inner_.grid(); }
  const GridPtr& grid_ptr() const noexcept { return inner_.grid_ptr(); }
  std::span<const double> values() const noexcept { return inner_.values(); }
  double operator[](std::size_t j) const { return inner_[j]; }
  std::size_t size() const noexcept { return inner_.size(); }

private:
  explicit WarpingFunction(GridFunction inner) : inner_(std::move(inner)) {}

  GridFunction inner_;
};

inline WarpingFunction validate_warping(const GridFunction& raw) {
  return WarpingFunction::validate(raw);
}

/// Nonnegative function integrating to eta = b - a: the representative of a
/// Bayes-space class that doubles as the derivative of a warping function.
class DensityFunction {
public:
  static DensityFunction validate(const GridFunction& raw) {
    for (std::size_t j = 0; j < raw.size(); ++j) {
      if (raw[j] < 0.0) {
        throw ValidationError("density negative at index " + std::to_string(j));
      }
    }
    const double eta = raw.grid().eta();
    const double mass = integrate(raw);
    if (std::abs(mass - eta) > density_mass_tolerance * eta) {
      throw ValidationError("density integrates to " + std::to_string(mass) + ", expected " +
                            std::to_string(eta));
    }
    return DensityFunction(raw);
  }

  /// Floors at zero and rescales to total mass eta.
  static DensityFunction normalize(const GridFunction& raw) {
    GridFunction floored = raw.map([](double x) { return std::max(x, 0.0); });
    const double mass = integrate(floored);
    if (!(mass > 0.0)) {
      throw DegenerateError("cannot normalize a density with zero mass");
    }
    const double scale = raw.grid().eta() / mass;
    return DensityFunction(scale * floored);
  }

  static DensityFunction uniform(const GridPtr& grid) {
    return DensityFunction(GridFunction::constant(grid, 1.0));
  }

  const GridFunction& function() const noexcept { return inner_; }
  const Grid& grid() const noexcept { return inner_.grid(); }
  const GridPtr& grid_ptr() const noexcept { return inner_.grid_ptr(); }
  std::span<const double> values() const noexcept { return inner_.values(); }
  double operator[](std::size_t j) const { return inner_[j]; }
  std::size_t size() const noexcept { return inner_.size(); }

private:
  explicit DensityFunction(GridFunction inner) : inner_(std::move(inner)) {}

  GridFunction inner_;
};

namespace detail {

inline double median(std::vector<double> xs) {
  const auto mid = xs.size() / 2;
  std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid), xs.end());
  const double upper = xs[mid];
  if (xs.size() % 2 == 1) {
    return upper;
  }
  const double lower = *std::max_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

inline std::vector<double> central_differences(std::span<const double> t,
                                               std::span<const double> values) {
  const std::size_t n = t.size();
  std::vector<double> out(n);
  out.front() = (values[1] - values[0]) / (t[1] - t[0]);
  out.back() = (values[n - 1] - values[n - 2]) / (t[n - 1] - t[n - 2]);
  for (std::size_t j = 1; j + 1 < n; ++j) {
    out[j] = (values[j + 1] - values[j - 1]) / (t[j + 1] - t[j - 1]);
  }
  return out;
}

/// Nodal derivative whose running trapezoidal integral reproduces `values`
/// exactly. Such derivatives form a one-parameter family f = p + x*(-1)^j;
/// x is the L1-best match to `central`, which keeps the alternating mode
/// away from a singular endpoint.
inline std::vector<double> trapezoid_consistent_derivative(std::span<const double> t,
                                                           std::span<const double> values,
                                                           std::span<const double> central) {
  const std::size_t n = t.size();
  std::vector<double> particular(n, 0.0);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double slope = (values[j + 1] - values[j]) / (t[j + 1] - t[j]);
    particular[j + 1] = 2.0 * slope - particular[j];
  }
  std::vector<double> residual(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double sign = (j % 2 == 0) ? 1.0 : -1.0;
    residual[j] = sign * (central[j] - particular[j]);
  }
  const double x = median(std::move(residual));
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double sign = (j % 2 == 0) ? 1.0 : -1.0;
    out[j] = particular[j] + sign * x;
  }
  return out;
}

/// Kinks in the warping leave a persistent alternating pattern in the
/// consistent derivative; when one is detected, central differences are used.
inline std::vector<double> nodal_derivative(std::span<const double> t,
                                            std::span<const double> values) {
  std::vector<double> central = central_differences(t, values);
  std::vector<double> consistent = trapezoid_consistent_derivative(t, values, central);
  // A kink makes the consistent solution alternate node to node; smooth
  // curvature does not. Compare second differences of the two estimates.
  const double mean_slope = (values.back() - values.front()) / (t.back() - t.front());
  std::size_t alternating = 0;
  for (std::size_t j = 1; j + 1 < t.size(); ++j) {
    const double d2f = std::abs(consistent[j + 1] - 2 * consistent[j] + consistent[j - 1]);
    const double d2c = std::abs(central[j + 1] - 2 * central[j] + central[j - 1]);
    if (d2f > 2 * d2c + 1e-2 * (std::abs(central[j]) + 1e-3 * std::abs(mean_slope))) {
      ++alternating;
    }
  }
  return alternating >= 2 ? central : consistent;
}

}  // namespace detail

/// D: warping -> density, floored at 0 and rescaled to mass eta. For smooth
/// warpings the nodal derivative is chosen so that inverse_D recovers the
/// warping exactly.
inline DensityFunction derivative_D(const WarpingFunction& gamma) {
  auto d = detail::nodal_derivative(gamma.grid().points(), gamma.values());
  return DensityFunction::normalize(gamma.function().with_values(std::move(d)));
}

/// Lower bound applied to densities before integration so that the result is
/// strictly increasing.
inline constexpr double density_epsilon = 1e-12;

/// D^{-1}: gamma(t) = a + integral of f from a to t, endpoints re-pinned.
inline WarpingFunction inverse_D(const GridFunction& f) {
  const Grid& grid = f.grid();
  const GridFunction cum =
      cumulative_integral(f.map([](double x) { return std::max(x, density_epsilon); }));
  const double scale = grid.eta() / cum.back();
  std::vector<double> values(f.size());
  for (std::size_t j = 0; j < values.size(); ++j) {
    values[j] = grid.a() + scale * cum[j];
  }
  return WarpingFunction::from_monotone(f.grid_ptr(), std::move(values));
}

inline WarpingFunction inverse_D(const DensityFunction& f) { return inverse_D(f.function()); }

/// x = w o gamma, evaluating w at gamma(t_j) by linear interpolation.
inline GridFunction compose(const GridFunction& w, const WarpingFunction& gamma) {
  require_same_grid(w, gamma.function());
  std::vector<double> out(w.size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = evaluate(w, gamma[j]);
  }
  return w.with_values(std::move(out));
}

}  // namespace warpfda
