#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>

namespace gtsne {

struct IntegralResult {
  double value = 0.0;
  bool converged = false;
  std::size_t evaluations = 0;
};

//! Composite trapezoid with interval halving until two successive
//! refinements agree to rel_tol (or max_refine levels are exhausted).
inline IntegralResult adaptive_trapezoid(const std::function<double(double)>& f,
                                         double a, double b,
                                         double rel_tol = 1e-12,
                                         unsigned max_refine = 22) {
  IntegralResult res;
  double h = b - a;
  double I = 0.5 * h * (f(a) + f(b));
  res.evaluations = 2;
  std::size_t intervals = 1;
  for (unsigned level = 0; level < max_refine; ++level) {
    double mid_sum = 0.0;
    double step = h / static_cast<double>(intervals);
    for (std::size_t i = 0; i < intervals; ++i)
      mid_sum += f(a + (static_cast<double>(i) + 0.5) * step);
    res.evaluations += intervals;
    double I_next = 0.5 * I + 0.5 * step * mid_sum;
    intervals *= 2;
    double scale = std::max(std::abs(I_next), 1e-300);
    if (level > 2 && std::abs(I_next - I) <= rel_tol * scale) {
      res.value = I_next;
      res.converged = true;
      return res;
    }
    I = I_next;
  }
  res.value = I;
  res.converged = false;
  return res;
}

//! Integral of f over [0, infinity) via doubling windows [0,1], [1,2],
//! [2,4], ...  Converged when two consecutive windows each contribute less
//! than rel_tol of the running total; divergence is reported when window
//! contributions stop shrinking or the total grows without bound.
inline IntegralResult improper_integral(const std::function<double(double)>& f,
                                        double rel_tol = 1e-10,
                                        unsigned max_windows = 60,
                                        unsigned max_refine = 20) {
  IntegralResult res;
  double total = 0.0;
  double lo = 0.0, hi = 1.0;
  double prev_window = std::numeric_limits<double>::infinity();
  unsigned small_streak = 0;
  unsigned nondecreasing_streak = 0;
  for (unsigned wdx = 0; wdx < max_windows; ++wdx) {
    IntegralResult part = adaptive_trapezoid(f, lo, hi, rel_tol, max_refine);
    res.evaluations += part.evaluations;
    if (!std::isfinite(part.value)) {
      res.value = std::numeric_limits<double>::infinity();
      res.converged = false;
      return res;
    }
    total += part.value;
    double scale = std::max(std::abs(total), 1e-300);
    if (std::abs(part.value) <= rel_tol * scale)
      ++small_streak;
    else
      small_streak = 0;
    if (wdx > 3 && std::abs(part.value) >= std::abs(prev_window) &&
        std::abs(part.value) > rel_tol * scale)
      ++nondecreasing_streak;
    else
      nondecreasing_streak = 0;
    if (small_streak >= 2) {
      res.value = total;
      res.converged = true;
      return res;
    }
    if (nondecreasing_streak >= 6 || std::abs(total) > 1e12) {
      res.value = std::numeric_limits<double>::infinity();
      res.converged = false;
      return res;
    }
    prev_window = part.value;
    lo = hi;
    hi *= 2.0;
  }
  res.value = total;
  res.converged = false;
  return res;
}

}  // namespace gtsne
