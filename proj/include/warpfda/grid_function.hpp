#pragma once

// Discretized functions on a shared grid over T = [a, b]: quadrature, inner
// products, norms, running integrals and linear interpolation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "warpfda/error.hpp"

namespace warpfda {

class Grid;
using GridPtr = std::shared_ptr<const Grid>;

/// Ordered sample points over [a, b] together with their trapezoidal weights.
///
/// Points are strictly increasing, with one exception: a grid produced by
/// Grid::join carries a single repeated abscissa at the junction. The repeated
/// pair encodes a jump (left and right limit); the zero-width cell between the
/// two copies contributes nothing to any quadrature.
class Grid {
public:
  static constexpr std::size_t min_size = 3;

  static GridPtr from_points(std::vector<double> points) {
    validate_strict(points);
    return std::shared_ptr<const Grid>(new Grid(std::move(points), std::nullopt));
  }

  static GridPtr uniform(double a, double b, std::size_t n) {
    if (!(b > a) || !std::isfinite(a) || !std::isfinite(b)) {
      throw ParameterError("uniform grid needs finite a < b");
    }
    if (n < min_size) {
      throw ParameterError("grid needs at least " + std::to_string(min_size) + " points");
    }
    std::vector<double> points(n);
    const double step = (b - a) / static_cast<double>(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      points[j] = a + step * static_cast<double>(j);
    }
    points.back() = b;
    return std::shared_ptr<const Grid>(new Grid(std::move(points), std::nullopt));
  }

  /// Concatenates `left` with `right` shifted so that right.a() lands on
  /// left.b(). The junction abscissa appears twice.
  static GridPtr join(const Grid& left, const Grid& right) {
    std::vector<double> points(left.points_);
    const double shift = left.b() - right.a();
    points.reserve(left.size() + right.size());
    for (double p : right.points_) {
      points.push_back(p + shift);
    }
    points[left.size()] = left.b();
    return std::shared_ptr<const Grid>(new Grid(std::move(points), left.size() - 1));
  }

  std::span<const double> points() const noexcept { return points_; }
  std::span<const double> weights() const noexcept { return weights_; }
  double point(std::size_t j) const { return points_[j]; }
  double weight(std::size_t j) const { return weights_[j]; }
  std::size_t size() const noexcept { return points_.size(); }
  double a() const noexcept { return points_.front(); }
  double b() const noexcept { return points_.back(); }
  double eta() const noexcept { return points_.back() - points_.front(); }

  /// Index i such that points i and i+1 coincide, if this is a joined grid.
  std::optional<std::size_t> junction() const noexcept { return junction_; }

  bool operator==(const Grid& other) const { return points_ == other.points_; }

private:
  Grid(std::vector<double> points, std::optional<std::size_t> junction)
      : points_(std::move(points)), weights_(points_.size(), 0.0), junction_(junction) {
    for (std::size_t j = 0; j + 1 < points_.size(); ++j) {
      const double half = 0.5 * (points_[j + 1] - points_[j]);
      weights_[j] += half;
      weights_[j + 1] += half;
    }
  }

  static void validate_strict(const std::vector<double>& points) {
    if (points.size() < min_size) {
      throw ParameterError("grid needs at least " + std::to_string(min_size) + " points");
    }
    for (std::size_t j = 0; j < points.size(); ++j) {
      if (!std::isfinite(points[j])) {
        throw ParameterError("grid point " + std::to_string(j) + " is not finite");
      }
      if (j > 0 && !(points[j] > points[j - 1])) {
        throw ParameterError("grid points must be strictly increasing (index " +
                             std::to_string(j) + ")");
      }
    }
  }

  std::vector<double> points_;
  std::vector<double> weights_;
  std::optional<std::size_t> junction_;
};

inline bool same_grid(const Grid& lhs, const Grid& rhs) { return &lhs == &rhs || lhs == rhs; }

/// A real function sampled on a Grid. Values are finite and aligned with the
/// grid points. Immutable apart from assignment.
class GridFunction {
public:
  GridFunction(GridPtr grid, std::vector<double> values)
      : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) {
      throw ParameterError("grid function needs a grid");
    }
    if (values_.size() != grid_->size()) {
      throw ParameterError("value count " + std::to_string(values_.size()) +
                           " does not match grid size " + std::to_string(grid_->size()));
    }
    for (std::size_t j = 0; j < values_.size(); ++j) {
      if (!std::isfinite(values_[j])) {
        throw ParameterError("grid function value at index " + std::to_string(j) +
                             " is not finite");
      }
    }
  }

  static GridFunction constant(GridPtr grid, double value) {
    const auto n = grid->size();
    return GridFunction(std::move(grid), std::vector<double>(n, value));
  }

  /// Samples `f` at every grid point.
  template <class F>
  static GridFunction sample(GridPtr grid, F&& f) {
    std::vector<double> values(grid->size());
    for (std::size_t j = 0; j < values.size(); ++j) {
      values[j] = f(grid->point(j));
    }
    return GridFunction(std::move(grid), std::move(values));
  }

  const Grid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t j) const { return values_[j]; }
  double front() const { return values_.front(); }
  double back() const { return values_.back(); }

  double min() const { return *std::min_element(values_.begin(), values_.end()); }
  double max() const { return *std::max_element(values_.begin(), values_.end()); }

  /// Pointwise application of `f`, keeping the grid.
  template <class F>
  GridFunction map(F&& f) const {
    std::vector<double> out(values_.size());
    std::transform(values_.begin(), values_.end(), out.begin(), std::forward<F>(f));
    return GridFunction(grid_, std::move(out));
  }

  GridFunction with_values(std::vector<double> values) const {
    return GridFunction(grid_, std::move(values));
  }

  friend GridFunction operator+(const GridFunction& lhs, const GridFunction& rhs) {
    return combine(lhs, rhs, std::plus<>{});
  }
  friend GridFunction operator-(const GridFunction& lhs, const GridFunction& rhs) {
    return combine(lhs, rhs, std::minus<>{});
  }
  friend GridFunction operator*(double alpha, const GridFunction& f) {
    return f.map([alpha](double x) { return alpha * x; });
  }
  friend GridFunction operator*(const GridFunction& f, double alpha) { return alpha * f; }

  /// Pointwise product f*g.
  friend GridFunction multiply(const GridFunction& lhs, const GridFunction& rhs) {
    return combine(lhs, rhs, std::multiplies<>{});
  }

private:
  template <class Op>
  static GridFunction combine(const GridFunction& lhs, const GridFunction& rhs, Op op) {
    require_same_grid(lhs, rhs);
    std::vector<double> out(lhs.size());
    for (std::size_t j = 0; j < out.size(); ++j) {
      out[j] = op(lhs.values_[j], rhs.values_[j]);
    }
    return GridFunction(lhs.grid_, std::move(out));
  }

  friend void require_same_grid(const GridFunction& lhs, const GridFunction& rhs) {
    if (!same_grid(lhs.grid(), rhs.grid())) {
      throw GridMismatchError();
    }
  }

  GridPtr grid_;
  std::vector<double> values_;
};

/// Trapezoidal approximation of the integral over [a, b].
inline double integrate(const GridFunction& f) {
  const auto w = f.grid().weights();
  const auto v = f.values();
  double sum = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    sum += w[j] * v[j];
  }
  return sum;
}

inline double inner_product(const GridFunction& f, const GridFunction& g) {
  require_same_grid(f, g);
  const auto w = f.grid().weights();
  const auto fv = f.values();
  const auto gv = g.values();
  double sum = 0.0;
  for (std::size_t j = 0; j < fv.size(); ++j) {
    sum += w[j] * fv[j] * gv[j];
  }
  return sum;
}

inline double squared_norm(const GridFunction& f) { return inner_product(f, f); }
inline double norm(const GridFunction& f) { return std::sqrt(squared_norm(f)); }

/// Running trapezoidal integral F with F(a) = 0.
inline GridFunction cumulative_integral(const GridFunction& f) {
  const auto t = f.grid().points();
  const auto v = f.values();
  std::vector<double> out(v.size(), 0.0);
  for (std::size_t j = 1; j < v.size(); ++j) {
    out[j] = out[j - 1] + 0.5 * (t[j] - t[j - 1]) * (v[j] + v[j - 1]);
  }
  return f.with_values(std::move(out));
}

inline double sup_norm(const GridFunction& f) {
  double m = 0.0;
  for (double x : f.values()) {
    m = std::max(m, std::abs(x));
  }
  return m;
}

inline double sup_distance(const GridFunction& f, const GridFunction& g) {
  return sup_norm(f - g);
}

/// Piecewise-linear interpolation of (xs, ys) at x, clamped to the end values
/// outside [xs.front(), xs.back()]. `xs` must be non-decreasing; on a repeated
/// abscissa the right-most sample wins.
inline double interpolate(std::span<const double> xs, std::span<const double> ys, double x) {
  if (x < xs.front()) {
    return ys.front();
  }
  if (x >= xs.back()) {
    return ys.back();
  }
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const auto hi = static_cast<std::size_t>(it - xs.begin());
  const auto lo = hi - 1;
  const double span = xs[hi] - xs[lo];
  if (span <= 0.0) {
    return ys[hi];
  }
  const double lambda = (x - xs[lo]) / span;
  return ys[lo] + lambda * (ys[hi] - ys[lo]);
}

/// Evaluates f at x by linear interpolation between grid points.
inline double evaluate(const GridFunction& f, double x) {
  return interpolate(f.grid().points(), f.values(), x);
}

/// Linear resampling of f onto another grid over the same interval.
inline GridFunction resample(const GridFunction& f, GridPtr target) {
  std::vector<double> out(target->size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = evaluate(f, target->point(j));
  }
  return GridFunction(std::move(target), std::move(out));
}

/// Pointwise mean of a non-empty set of functions on one grid.
inline GridFunction pointwise_mean(std::span<const GridFunction> fs) {
  if (fs.empty()) {
    throw InsufficientDataError("mean of an empty sample");
  }
  std::vector<double> acc(fs.front().size(), 0.0);
  for (const auto& f : fs) {
    require_same_grid(fs.front(), f);
    for (std::size_t j = 0; j < acc.size(); ++j) {
      acc[j] += f[j];
    }
  }
  const double n = static_cast<double>(fs.size());
  for (double& x : acc) {
    x /= n;
  }
  return fs.front().with_values(std::move(acc));
}

/// Pointwise empirical variance with divisor N.
inline GridFunction pointwise_variance(std::span<const GridFunction> fs) {
  const GridFunction mean = pointwise_mean(fs);
  std::vector<double> acc(mean.size(), 0.0);
  for (const auto& f : fs) {
    for (std::size_t j = 0; j < acc.size(); ++j) {
      const double d = f[j] - mean[j];
      acc[j] += d * d;
    }
  }
  const double n = static_cast<double>(fs.size());
  for (double& x : acc) {
    x /= n;
  }
  return mean.with_values(std::move(acc));
}

}  // namespace warpfda
