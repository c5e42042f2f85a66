#pragma once

#include <cmath>
#include <cstddef>
#include <limits>

namespace warpfda {

struct ScalarMinimum {
  double x;
  double value;
  std::size_t evaluations;
};

/// Golden-section search for a minimum of `f` on [lo, hi], stopping once the
/// bracket is narrower than `tol`. Non-finite values count as +infinity. The
/// endpoints are evaluated too and win if they are strictly better, so the
/// result is never worse than either end of the bracket.
template <class F>
ScalarMinimum golden_section_minimize(F&& f, double lo, double hi, double tol,
                                      std::size_t max_iterations = 200) {
  const auto eval = [&f](double x) {
    const double y = f(x);
    return std::isfinite(y) ? y : std::numeric_limits<double>::infinity();
  };
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  std::size_t evaluations = 0;

  const double f_lo = eval(lo);
  const double f_hi = eval(hi);
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = eval(c);
  double fd = eval(d);
  evaluations += 4;

  for (std::size_t it = 0; it < max_iterations && (b - a) > tol; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = eval(d);
    }
    ++evaluations;
  }

  ScalarMinimum best = (fc <= fd) ? ScalarMinimum{c, fc, 0} : ScalarMinimum{d, fd, 0};
  if (f_lo < best.value) {
    best = {lo, f_lo, 0};
  }
  if (f_hi < best.value) {
    best = {hi, f_hi, 0};
  }
  best.evaluations = evaluations;
  return best;
}

}  // namespace warpfda
