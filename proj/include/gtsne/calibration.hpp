#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "gtsne/core.hpp"
#include "gtsne/errors.hpp"
#include "gtsne/kernels.hpp"
#include "gtsne/parallel.hpp"

namespace gtsne {

namespace config {
constexpr double kSigmaTol = 1e-8;          // entropy residual, nats
constexpr std::size_t kSigmaMaxIter = 100;  // bisection steps
constexpr double kBracketDelta = 1e-4;      // spread floor for the bracket
constexpr unsigned kBracketExpansions = 40; // tenfold widenings per side
}  // namespace config

struct SigmaResult {
  double sigma = 0.0;
  double residual = 0.0;  // entropy(sigma) - log(n rho)
  std::size_t iterations = 0;
};

namespace detail {

//! Distances of point i to every other point, raised to theta.  theta = 2
//! and theta = 1 bypass pow entirely.
inline std::vector<double> powered_distances(const Matrix& x, std::size_t i,
                                             double theta) {
  std::size_t n = x.rows(), d = x.cols();
  std::vector<double> u;
  u.reserve(n - 1);
  for (std::size_t k = 0; k < n; ++k) {
    if (k == i) continue;
    double r2 = squared_distance(x.row(i), x.row(k), d);
    if (theta == 2.0)
      u.push_back(r2);
    else if (theta == 1.0)
      u.push_back(std::sqrt(r2));
    else
      u.push_back(std::pow(r2, 0.5 * theta));
  }
  return u;
}

//! Entropy of the conditional distribution for one point at a given sigma,
//! evaluated with the largest-log shift so the dominant weight is exp(0).
//! Powered distances come in via `u`; `v` holds u^a for the power family so
//! the inner loop is a single multiply.
struct RowEntropy {
  const InputKernel* kin;
  const std::vector<double>* u;
  std::vector<double> v;  // power-family fast path

  RowEntropy(const InputKernel& kernel, const std::vector<double>& powered)
      : kin(&kernel), u(&powered) {
    if (kin->family == InputFamily::power) {
      v.resize(u->size());
      for (std::size_t k = 0; k < u->size(); ++k)
        v[k] = kin->a == 1.0 ? (*u)[k] : std::pow((*u)[k], kin->a);
    }
  }

  double entropy(double sigma) const {
    std::size_t m = u->size();
    thread_local std::vector<double> w;
    w.resize(m);
    if (!v.empty()) {
      double s = kin->a == 1.0 ? sigma : std::pow(sigma, kin->a);
      for (std::size_t k = 0; k < m; ++k) w[k] = s * v[k];
    } else {
      for (std::size_t k = 0; k < m; ++k) w[k] = kin->w(sigma * (*u)[k]);
    }
    double shift = w[0];
    for (std::size_t k = 1; k < m; ++k)
      if (w[k] < shift) shift = w[k];
    if (!std::isfinite(shift))
      throw Error(errc::calibration_underflow,
                  "all conditional weights vanished (sigma = " +
                      format_sci(sigma) + ")");
    double sum = 0.0, moment = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      double e = std::exp(-(w[k] - shift));
      sum += e;
      moment += (w[k] - shift) * e;
    }
    return std::log(sum) + moment / sum;
  }
};

}  // namespace detail

//! p_{j|i} at the given sigma: exp(-w(sigma d_ij^theta)) normalized over
//! j != i, with p_{i|i} = 0.
inline std::vector<double> conditional_distribution(const InputKernel& kin,
                                                    const Matrix& x,
                                                    std::size_t i,
                                                    double sigma) {
  std::size_t n = x.rows();
  require(n >= 2, errc::invalid_input, "need at least two points");
  require(i < n, errc::invalid_input, "point index out of range");
  require(std::isfinite(sigma) && sigma > 0.0, errc::invalid_input,
          "sigma must be positive");
  auto u = detail::powered_distances(x, i, kin.theta);
  std::vector<double> w(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) w[k] = kin.w(sigma * u[k]);
  double shift = w[0];
  for (double v : w)
    if (v < shift) shift = v;
  if (!std::isfinite(shift))
    throw Error(errc::calibration_underflow,
                "all conditional weights vanished (sigma = " +
                    format_sci(sigma) + ")");
  std::vector<double> p(n, 0.0);
  double sum = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    double e = std::exp(-(w[k] - shift));
    w[k] = e;
    sum += e;
  }
  std::size_t kk = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    p[j] = w[kk++] / sum;
  }
  return p;
}

//! Shannon entropy, nats; zero entries contribute zero.
inline double entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

namespace detail {

inline SigmaResult solve_sigma_impl(const InputKernel& kin, const Matrix& x,
                                    std::size_t i, double rho, double tol,
                                    std::size_t max_iter) {
  std::size_t n = x.rows();
  double target = std::log(static_cast<double>(n) * rho);

  auto u = powered_distances(x, i, kin.theta);
  RowEntropy row(kin, u);

  // Entropy is strictly decreasing in sigma, so bracket then bisect in
  // log sigma.  Initial bracket: sigma in [n^{-theta/2}, delta^{-theta}].
  double lo = std::pow(static_cast<double>(n), -0.5 * kin.theta);
  double hi = std::pow(config::kBracketDelta, -kin.theta);
  if (lo > hi) std::swap(lo, hi);

  double h_lo = row.entropy(lo);
  double h_hi = row.entropy(hi);

  unsigned expansions = 0;
  while (h_lo < target && expansions < config::kBracketExpansions) {
    lo /= 10.0;
    h_lo = row.entropy(lo);
    ++expansions;
  }
  double h_prev = h_hi;
  unsigned flat = 0;
  expansions = 0;
  while (h_hi > target && expansions < config::kBracketExpansions) {
    hi *= 10.0;
    h_hi = row.entropy(hi);
    if (std::abs(h_hi - h_prev) < 1e-9)
      ++flat;
    else
      flat = 0;
    h_prev = h_hi;
    ++expansions;
  }
  if (h_lo < target || h_hi > target) {
    bool geometric_floor = flat >= 3 || std::abs(h_lo - h_hi) < 1e-9;
    if (geometric_floor)
      throw Error(errc::degenerate_geometry,
                  "entropy is flat in sigma near " + format_sci(h_hi) +
                      " nats; the target is outside the reachable range "
                      "(duplicate points, distance ties, or a heavy-tailed "
                      "profile)");
    throw Error(errc::no_convergence,
                "could not bracket the entropy target after " +
                    std::to_string(config::kBracketExpansions) +
                    " expansions");
  }

  double xlo = std::log(lo), xhi = std::log(hi);
  SigmaResult res;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    double xm = 0.5 * (xlo + xhi);
    double sm = std::exp(xm);
    double hm = row.entropy(sm);
    res.sigma = sm;
    res.residual = hm - target;
    res.iterations = it;
    if (std::abs(res.residual) <= tol) return res;
    if (hm > target)
      xlo = xm;
    else
      xhi = xm;
  }
  throw Error(errc::no_convergence,
              "bisection did not reach tolerance " + format_sci(tol) +
                  " in " + std::to_string(max_iter) +
                  " iterations (residual " + format_sci(res.residual) + ")");
}

}  // namespace detail

//! Feasibility of the entropy target log(n rho) given n points: the
//! conditional entropy lives strictly inside (0, log(n-1)).
inline void check_perplexity_feasible(std::size_t n, double rho) {
  require(n >= 3, errc::invalid_input, "need at least three points");
  require(std::isfinite(rho) && rho > 0.0 && rho < 1.0, errc::invalid_input,
          "rho must lie in (0, 1)");
  double target = std::log(static_cast<double>(n) * rho);
  if (target <= 0.0)
    throw Error(errc::infeasible_perplexity,
                "log(n rho) = " + format_sci(target) +
                    " is not positive; increase rho or n");
  if (target >= std::log(static_cast<double>(n - 1)))
    throw Error(errc::infeasible_perplexity,
                "log(n rho) = " + format_sci(target) +
                    " is not below log(n-1) = " +
                    format_sci(std::log(static_cast<double>(n - 1))));
}

//! Solves entropy(conditional(i, sigma)) = log(n rho) for sigma_i.
inline SigmaResult solve_sigma(const InputKernel& kin, const Matrix& x,
                               std::size_t i, double rho,
                               double tol = config::kSigmaTol,
                               std::size_t max_iter = config::kSigmaMaxIter) {
  check_perplexity_feasible(x.rows(), rho);
  require(i < x.rows(), errc::invalid_input, "point index out of range");
  return detail::solve_sigma_impl(kin, x, i, rho, tol, max_iter);
}

//! Calibrates every point; failures are collected and reported together
//! with their point indices.
inline std::vector<SigmaResult> calibrate_all(
    const InputKernel& kin, const Matrix& x, double rho,
    double tol = config::kSigmaTol,
    std::size_t max_iter = config::kSigmaMaxIter) {
  check_perplexity_feasible(x.rows(), rho);
  require(x.all_finite(), errc::invalid_input, "points contain non-finite values");
  std::size_t n = x.rows();
  std::vector<std::optional<SigmaResult>> ok(n);
  std::vector<std::optional<CalibrationFailure>> bad(n);
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      try {
        ok[i] = detail::solve_sigma_impl(kin, x, i, rho, tol, max_iter);
      } catch (const Error& err) {
        bad[i] = CalibrationFailure{i, err.code(), err.what()};
      }
    }
  });
  std::vector<CalibrationFailure> failures;
  for (std::size_t i = 0; i < n; ++i)
    if (bad[i]) failures.push_back(*bad[i]);
  if (!failures.empty()) {
    std::string msg = std::to_string(failures.size()) + " of " +
                      std::to_string(n) + " points failed; first at index " +
                      std::to_string(failures.front().index) + ": " +
                      failures.front().message;
    throw CalibrationError(std::move(failures), msg);
  }
  std::vector<SigmaResult> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = *ok[i];
  return out;
}

//! Empirical calibration functional: F(x_i, sigma) = log(n rho) - H(sigma),
//! the quantity driven to zero by solve_sigma.  Strictly increasing in
//! sigma because H is strictly decreasing.
inline double empirical_F(const InputKernel& kin, const Matrix& x,
                          std::size_t i, double sigma, double rho) {
  auto u = detail::powered_distances(x, i, kin.theta);
  detail::RowEntropy row(kin, u);
  return std::log(static_cast<double>(x.rows()) * rho) - row.entropy(sigma);
}

}  // namespace gtsne
