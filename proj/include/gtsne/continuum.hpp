#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "gtsne/affinity.hpp"
#include "gtsne/calibration.hpp"
#include "gtsne/core.hpp"
#include "gtsne/descent.hpp"
#include "gtsne/errors.hpp"
#include "gtsne/kernels.hpp"
#include "gtsne/parallel.hpp"
#include "gtsne/quadrature.hpp"

namespace gtsne {

namespace config {
constexpr std::size_t kNodes1D = 2048;  // trapezoid nodes per axis, d = 1
constexpr std::size_t kNodes2D = 256;   // trapezoid nodes per axis, d = 2
constexpr double kFTol = 1e-8;          // continuum root residual
}  // namespace config

//! A compactly supported reference measure, stored as quadrature nodes and
//! weights on its support box (composite trapezoid per component,
//! tensorized across axes).  Weights sum to 1 up to quadrature error.
struct ContinuumMeasure {
  std::size_t dim = 0;
  std::vector<double> box_lo, box_hi;  // support bounding box
  std::vector<double> nodes;           // node-major, dim doubles per node
  std::vector<double> weights;         // one per node
  std::string id;

  std::size_t size() const { return weights.size(); }
  const double* node(std::size_t k) const { return nodes.data() + k * dim; }

  double total_mass() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }

  bool contains(const double* x) const {
    for (std::size_t k = 0; k < dim; ++k) {
      double pad = 1e-9 * (1.0 + box_hi[k] - box_lo[k]);
      if (x[k] < box_lo[k] - pad || x[k] > box_hi[k] + pad) return false;
    }
    return true;
  }
};

namespace detail {

inline std::size_t default_axis_nodes(std::size_t dim) {
  if (dim == 1) return config::kNodes1D;
  if (dim == 2) return config::kNodes2D;
  throw Error(errc::config, "measures support dimension 1 or 2");
}

//! Tensorized trapezoid rule over a box with a pointwise density.
template <class Density>
void fill_box(ContinuumMeasure& m, const std::vector<double>& lo,
              const std::vector<double>& hi, std::size_t axis_nodes,
              double component_weight, Density&& density) {
  std::size_t dim = lo.size();
  require(axis_nodes >= 2, errc::config, "need at least two nodes per axis");
  std::vector<double> h(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    require(hi[k] > lo[k], errc::config, "box bounds must satisfy lo < hi");
    h[k] = (hi[k] - lo[k]) / static_cast<double>(axis_nodes - 1);
  }
  std::vector<std::size_t> idx(dim, 0);
  std::vector<double> pt(dim);
  while (true) {
    double w = component_weight;
    for (std::size_t k = 0; k < dim; ++k) {
      pt[k] = lo[k] + h[k] * static_cast<double>(idx[k]);
      double wk = h[k];
      if (idx[k] == 0 || idx[k] + 1 == axis_nodes) wk *= 0.5;
      w *= wk;
    }
    double dens = density(pt.data());
    require(dens >= 0.0 && std::isfinite(dens), errc::config,
            "density must be finite and nonnegative");
    m.nodes.insert(m.nodes.end(), pt.begin(), pt.end());
    m.weights.push_back(w * dens);
    std::size_t k = 0;
    while (k < dim && ++idx[k] == axis_nodes) idx[k++] = 0;
    if (k == dim) break;
  }
}

inline void merge_box(ContinuumMeasure& m, const std::vector<double>& lo,
                      const std::vector<double>& hi) {
  if (m.box_lo.empty()) {
    m.box_lo = lo;
    m.box_hi = hi;
    return;
  }
  for (std::size_t k = 0; k < m.dim; ++k) {
    m.box_lo[k] = std::min(m.box_lo[k], lo[k]);
    m.box_hi[k] = std::max(m.box_hi[k], hi[k]);
  }
}

}  // namespace detail

//! Uniform distribution on a box.
inline ContinuumMeasure uniform_box(const std::vector<double>& lo,
                                    const std::vector<double>& hi,
                                    std::size_t axis_nodes = 0) {
  require(!lo.empty() && lo.size() == hi.size(), errc::config,
          "bounds must be nonempty and of equal length");
  ContinuumMeasure m;
  m.dim = lo.size();
  if (axis_nodes == 0) axis_nodes = detail::default_axis_nodes(m.dim);
  double vol = 1.0;
  for (std::size_t k = 0; k < m.dim; ++k) vol *= hi[k] - lo[k];
  detail::fill_box(m, lo, hi, axis_nodes, 1.0,
                   [inv = 1.0 / vol](const double*) { return inv; });
  detail::merge_box(m, lo, hi);
  m.id = "uniform-box";
  return m;
}

//! Axis-aligned Gaussian truncated to a box and renormalized.
inline ContinuumMeasure trunc_gauss(const std::vector<double>& mean,
                                    const std::vector<double>& stddev,
                                    const std::vector<double>& lo,
                                    const std::vector<double>& hi,
                                    std::size_t axis_nodes = 0) {
  std::size_t dim = mean.size();
  require(dim >= 1 && stddev.size() == dim && lo.size() == dim &&
              hi.size() == dim,
          errc::config, "mean, stddev, lo, hi must share length");
  for (double s : stddev)
    require(s > 0.0 && std::isfinite(s), errc::config,
            "stddev must be positive");
  ContinuumMeasure m;
  m.dim = dim;
  if (axis_nodes == 0) axis_nodes = detail::default_axis_nodes(dim);
  double norm = 1.0;
  for (std::size_t k = 0; k < dim; ++k) {
    auto cdf = [&](double t) {
      return 0.5 *
             (1.0 + std::erf((t - mean[k]) / (stddev[k] * std::numbers::sqrt2)));
    };
    double mass = cdf(hi[k]) - cdf(lo[k]);
    require(mass > 1e-12, errc::config, "box carries no Gaussian mass");
    norm *= mass * stddev[k] * std::sqrt(2.0 * std::numbers::pi);
  }
  detail::fill_box(m, lo, hi, axis_nodes, 1.0, [&](const double* p) {
    double e = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      double z = (p[k] - mean[k]) / stddev[k];
      e += 0.5 * z * z;
    }
    return std::exp(-e) / norm;
  });
  detail::merge_box(m, lo, hi);
  m.id = "trunc-gauss";
  return m;
}

//! Convex combination of measures; each component keeps its own aligned
//! grid, so component boundaries stay exact quadrature breakpoints.
inline ContinuumMeasure mixture(const std::vector<ContinuumMeasure>& parts,
                                const std::vector<double>& weights) {
  require(!parts.empty() && parts.size() == weights.size(), errc::config,
          "mixture needs matching components and weights");
  double total = 0.0;
  for (double w : weights) {
    require(w >= 0.0 && std::isfinite(w), errc::config,
            "mixture weights must be nonnegative");
    total += w;
  }
  require(std::abs(total - 1.0) <= 1e-9, errc::config,
          "mixture weights must sum to 1");
  ContinuumMeasure m;
  m.dim = parts.front().dim;
  for (std::size_t c = 0; c < parts.size(); ++c) {
    require(parts[c].dim == m.dim, errc::config,
            "mixture components must share dimension");
    if (weights[c] == 0.0) continue;
    m.nodes.insert(m.nodes.end(), parts[c].nodes.begin(),
                   parts[c].nodes.end());
    for (double w : parts[c].weights) m.weights.push_back(weights[c] * w);
    detail::merge_box(m, parts[c].box_lo, parts[c].box_hi);
  }
  m.id = "mixture";
  return m;
}

//! Z(x, sigma) = integral of exp(-w(sigma ||x - x'||^theta)) d mu(x').
inline double continuum_Z(const ContinuumMeasure& mu, const InputKernel& kin,
                          const double* x, double sigma) {
  double z = 0.0;
  bool theta2 = kin.theta == 2.0;
  for (std::size_t k = 0; k < mu.size(); ++k) {
    double r2 = squared_distance(x, mu.node(k), mu.dim);
    double t = theta2 ? r2 : std::pow(r2, 0.5 * kin.theta);
    z += mu.weights[k] * std::exp(-kin.w(sigma * t));
  }
  return z;
}

//! Calibration functional of the continuum:
//!   F(x, sigma) = -E_p[w] - log Z + log rho,
//! where p is the conditional density f / Z.  Strictly increasing in sigma
//! on admissible kernels; tends to log rho as sigma -> 0.
inline double big_F(const ContinuumMeasure& mu, const InputKernel& kin,
                    double rho, const double* x, double sigma) {
  require(sigma > 0.0 && std::isfinite(sigma), errc::invalid_input,
          "sigma must be positive");
  require(mu.contains(x), errc::invalid_input,
          "evaluation point outside the measure's support box");
  double z = 0.0, moment = 0.0;
  bool theta2 = kin.theta == 2.0;
  for (std::size_t k = 0; k < mu.size(); ++k) {
    double r2 = squared_distance(x, mu.node(k), mu.dim);
    double t = theta2 ? r2 : std::pow(r2, 0.5 * kin.theta);
    double w = kin.w(sigma * t);
    double f = std::exp(-w);
    z += mu.weights[k] * f;
    moment += mu.weights[k] * w * f;
  }
  if (!(z > 0.0) || !std::isfinite(z))
    throw Error(errc::evaluation,
                "quadrature normalizer vanished (sigma = " +
                    format_sci(sigma) + " beyond grid resolution)");
  return -moment / z - std::log(z) + std::log(rho);
}

//! Root of big_F(x, .) = 0, by bracketing and bisection in log sigma;
//! monotonicity of F makes the root unique.
inline SigmaResult sigma_star(const ContinuumMeasure& mu,
                              const InputKernel& kin, double rho,
                              const double* x, double tol = config::kFTol,
                              std::size_t max_iter = 200) {
  require(rho > 0.0 && rho < 1.0, errc::invalid_input,
          "rho must lie in (0, 1)");
  double lo = 1e-4, hi = 1e2;
  double f_lo = big_F(mu, kin, rho, x, lo);
  double f_hi = big_F(mu, kin, rho, x, hi);
  unsigned guard = 0;
  while (f_lo > 0.0 && guard++ < config::kBracketExpansions) {
    lo /= 10.0;
    f_lo = big_F(mu, kin, rho, x, lo);
  }
  guard = 0;
  while (f_hi < 0.0 && guard++ < config::kBracketExpansions) {
    hi *= 10.0;
    f_hi = big_F(mu, kin, rho, x, hi);
  }
  if (f_lo > 0.0 || f_hi < 0.0)
    throw Error(errc::no_convergence,
                "could not bracket the continuum calibration root");
  double xlo = std::log(lo), xhi = std::log(hi);
  SigmaResult res;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    double xm = 0.5 * (xlo + xhi);
    double sm = std::exp(xm);
    double fm = big_F(mu, kin, rho, x, sm);
    res.sigma = sm;
    res.residual = fm;
    res.iterations = it;
    if (std::abs(fm) <= tol) return res;
    if (fm < 0.0)
      xlo = xm;
    else
      xhi = xm;
  }
  throw Error(errc::no_convergence,
              "continuum bisection stalled (residual " +
                  format_sci(res.residual) + ")");
}

//! Symmetrized conditional density under the measure:
//!   p_psi(x, x') = [f(x,x';psi(x))/Z(x) + f(x',x;psi(x'))/Z(x')] / 2,
//! symmetric in (x, x') by construction; equals 1/Z(x) on the diagonal.
inline double p_psi(const ContinuumMeasure& mu, const InputKernel& kin,
                    const std::function<double(const double*)>& psi,
                    const double* x, const double* xp) {
  require(mu.contains(x) && mu.contains(xp), errc::invalid_input,
          "evaluation point outside the measure's support box");
  double sx = psi(x), sxp = psi(xp);
  require(sx > 0.0 && sxp > 0.0, errc::invalid_input,
          "psi must return positive scales");
  double zx = continuum_Z(mu, kin, x, sx);
  double zxp = continuum_Z(mu, kin, xp, sxp);
  if (!(zx > 0.0) || !(zxp > 0.0))
    throw Error(errc::evaluation, "quadrature normalizer vanished in p_psi");
  double r2 = squared_distance(x, xp, mu.dim);
  double t = kin.theta == 2.0 ? r2 : std::pow(r2, 0.5 * kin.theta);
  double fx = std::exp(-kin.w(sx * t));
  double fxp = std::exp(-kin.w(sxp * t));
  return 0.5 * (fx / zx + fxp / zxp);
}

//! A point set together with its embedding, viewed as the empirical
//! coupling (1/n) sum of point masses at (X_i, Y_i).
struct JointSample {
  Matrix x;
  Matrix y;
};

//! Output density of the embedded sample at an arbitrary pair:
//!   q(y, y') = g(y, y') / [(1/n^2) sum_{k,l} g(Y_k, Y_l) - k(0)/n],
//! the diagonal-corrected empirical normalizer; off-diagonal sample pairs
//! get exactly n^2 Q_ij.
inline double q_continuous(const JointSample& sample, const OutputKernel& kout,
                           const double* y, const double* yp) {
  std::size_t n = sample.y.rows(), s = sample.y.cols();
  require(n >= 2, errc::invalid_input, "need at least two sample points");
  std::vector<double> row_sums(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = i + 1; j < n; ++j)
      acc += kout.k(distance(sample.y.row(i), sample.y.row(j), s));
    row_sums[i] = acc;
  }
  double off_mean = 2.0 * ordered_sum(row_sums) /
                    (static_cast<double>(n) * static_cast<double>(n));
  require(off_mean > 0.0, errc::divergence, "output normalizer is zero");
  return kout.k(distance(y, yp, s)) / off_mean;
}

//! Empirical conditional density matrix for a calibrated scale field:
//! entry (i, j) is p_psi of the empirical measure, whose normalizers
//! Z_i = (1/n) sum_k f(X_i, X_k; sigma_i) keep the unit self term.
inline Matrix p_psi_matrix(const InputKernel& kin, const Matrix& x,
                           const std::vector<double>& sigmas) {
  std::size_t n = x.rows();
  require(sigmas.size() == n, errc::invalid_input, "one sigma per point");
  Matrix f(n, n, 0.0);
  bool theta2 = kin.theta == 2.0;
  parallel_for(n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double r2 = squared_distance(x.row(i), x.row(j), x.cols());
        double t = theta2 ? r2 : std::pow(r2, 0.5 * kin.theta);
        f(i, j) = std::exp(-kin.w(sigmas[i] * t));
      }
  });
  std::vector<double> z(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += f(i, j);
    z[i] = s / static_cast<double>(n);
  }
  Matrix p(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      p(i, j) = 0.5 * (f(i, j) / z[i] + f(j, i) / z[j]);
  return p;
}

//! Output density matrix with the diagonal-corrected normalizer; entry
//! (i, j) equals q_continuous at (Y_i, Y_j).
inline Matrix q_matrix(const OutputKernel& kout, const Matrix& y) {
  std::size_t n = y.rows();
  OutputAffinities oa = output_affinities(kout, y);
  require(oa.S > 0.0, errc::divergence, "output normalizer is zero");
  double denom = oa.S / (static_cast<double>(n) * static_cast<double>(n));
  Matrix q(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      q(i, j) = (i == j ? kout.k0() : oa.g(i, j)) / denom;
  return q;
}

namespace detail {

//! (1/n^2) sum_{i != j} p log(p / q) over paired density matrices.
inline double relative_entropy_mean(const Matrix& p, const Matrix& q) {
  std::size_t n = p.rows();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      double pv = p(i, j);
      if (pv <= 0.0) continue;
      double qv = q(i, j);
      if (qv <= 0.0)
        throw Error(errc::divergence,
                    "output density vanished under positive conditional mass");
      acc += pv * std::log(pv / qv);
    }
  return acc / (static_cast<double>(n) * static_cast<double>(n));
}

}  // namespace detail

//! Plug-in of the equilibrium functional at the joint sample:
//!   I = (1/n^2) sum_{i != j} p_sigma*(X_i, X_j) log(p_sigma* / q),
//! with sigma* from the per-point entropy calibration of the X-marginal
//! and q the diagonal-corrected output density.  Matches the achieved
//! loss up to the self-term bias in Z_i, which decays with n.
inline double functional_I(const JointSample& sample, const InputKernel& kin,
                           const OutputKernel& kout, double rho) {
  std::size_t n = sample.x.rows();
  require(n >= 2 && sample.y.rows() == n, errc::invalid_input,
          "joint sample must pair every point with an embedding row");
  auto res = calibrate_all(kin, sample.x, rho);
  std::vector<double> sig;
  sig.reserve(n);
  for (const auto& r : res) sig.push_back(r.sigma);
  Matrix p = p_psi_matrix(kin, sample.x, sig);
  Matrix q = q_matrix(kout, sample.y);
  return detail::relative_entropy_mean(p, q);
}

//! | sum_{i != j} P_ij log P_ij + 2 log n - (1/n^2) sum_{i,j} p log p |:
//! the finite-sample defect in the entropy expansion.  The double sum
//! keeps its diagonal because the empirical product measure charges it.
inline double entropy_expansion_residual(const Matrix& P,
                                         const Matrix& p_psi_m) {
  std::size_t n = P.rows();
  double lhs = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      double p = P(i, j);
      if (p > 0.0) lhs += p * std::log(p);
    }
  double rhs = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double p = p_psi_m(i, j);
      if (p > 0.0) rhs += p * std::log(p);
    }
  rhs /= static_cast<double>(n) * static_cast<double>(n);
  return std::abs(lhs + 2.0 * std::log(static_cast<double>(n)) - rhs);
}

//! Per-point first-order residuals of the joint sample:
//!   r_i = || (1/n) sum_{j != i} (p_n - q_n) k'(r_ij) (Y_i - Y_j) / (r_ij g) ||.
//! With p_n = n^2 P_ij and q_n = n^2 Q_ij this is (n / c) times the loss
//! gradient row norm, so converged descents drive it to the scaled
//! stop tolerance.
inline std::vector<double> stationarity_residual(const JointSample& sample,
                                                 const InputKernel& kin,
                                                 const OutputKernel& kout,
                                                 double rho) {
  auto res = calibrate_all(kin, sample.x, rho);
  Matrix P = joint_affinities(kin, sample.x, res);
  return stationarity_residuals(P, sample.y, kout);
}

//! Chebyshev-type gap: for nonnegative weights and samples of f, g, h,
//!   gap = (sum w f)(sum w h g) - (sum w h)(sum w f g) >= 0
//! whenever (g(x) - g(y))(f(y)/h(y) - f(x)/h(x)) >= 0 for all pairs.  The
//! identity 2 gap = sum_{x,y} w_x w_y h(x) h(y) (g(x) - g(y))
//! (f(y)/h(y) - f(x)/h(x)) is the double-sum oracle used in the tests.
inline double chebyshev_gap(const std::vector<double>& f,
                            const std::vector<double>& g,
                            const std::vector<double>& h,
                            const std::vector<double>& w) {
  std::size_t n = w.size();
  require(n >= 1 && f.size() == n && g.size() == n && h.size() == n,
          errc::invalid_input, "gap inputs must share length");
  for (std::size_t i = 0; i < n; ++i)
    require(h[i] > 0.0 && w[i] >= 0.0, errc::invalid_input,
            "gap requires h > 0 and w >= 0");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double v = (g[i] - g[j]) * (f[j] / h[j] - f[i] / h[i]);
      if (v < 0.0)
        throw Error(errc::incompatible_triple,
                    "ordering hypothesis fails at pair (" +
                        std::to_string(i) + "," + std::to_string(j) + ")");
    }
  double swf = 0.0, swhg = 0.0, swh = 0.0, swfg = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    swf += w[i] * f[i];
    swhg += w[i] * h[i] * g[i];
    swh += w[i] * h[i];
    swfg += w[i] * f[i] * g[i];
  }
  return swf * swhg - swh * swfg;
}

//! Normalizing constant of the input kernel on R^d:
//!   Z_d = S_{d-1} * integral_0^inf t^{d-1} exp(-w(t^theta)) dt,
//! with S_{d-1} the surface area of the unit sphere.
inline double normalization_Zd(const InputKernel& kin, std::size_t d) {
  require(d >= 1, errc::invalid_input, "dimension must be at least 1");
  double surface =
      2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
  auto integrand = [&](double t) {
    double base = d >= 2 ? std::pow(t, static_cast<double>(d - 1)) : 1.0;
    return base * std::exp(-kin.w(std::pow(t, kin.theta)));
  };
  IntegralResult ir = improper_integral(integrand, 1e-12);
  if (!ir.converged || !std::isfinite(ir.value))
    throw Error(errc::kernel_invalid,
                "normalizing integral does not converge");
  return surface * ir.value;
}

}  // namespace gtsne
