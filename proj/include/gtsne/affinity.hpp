#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "gtsne/calibration.hpp"
#include "gtsne/core.hpp"
#include "gtsne/errors.hpp"
#include "gtsne/kernels.hpp"
#include "gtsne/parallel.hpp"

namespace gtsne {

//! Multiplier c in the loss gradient
//!   dL/dy_i = -c * sum_j (P_ij - Q_ij) * k'(r_ij)/(r_ij g_ij) * (y_i - y_j).
//! The loss sums over ordered pairs and both (i,j) and (j,i) move with y_i,
//! so c = 2; anchored against finite differences of the implemented loss in
//! the test suite.  With the unit Cauchy kernel the per-pair factor reduces
//! to the classical 4 (P_ij - Q_ij) (y_i - y_j) / (1 + r^2).
constexpr double kGradientFactor = 2.0;

//! Symmetrized joint affinities P_ij = (p_{j|i} + p_{i|j}) / (2n) from
//! per-point calibrated scales.  Zero diagonal; entries sum to 1.
inline Matrix joint_affinities(const InputKernel& kin, const Matrix& x,
                               const std::vector<SigmaResult>& sigmas) {
  std::size_t n = x.rows();
  require(sigmas.size() == n, errc::invalid_input,
          "one sigma per point required");
  Matrix cond(n, n, 0.0);
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      auto p = conditional_distribution(kin, x, i, sigmas[i].sigma);
      for (std::size_t j = 0; j < n; ++j) cond(i, j) = p[j];
    }
  });
  Matrix P(n, n, 0.0);
  double inv2n = 1.0 / (2.0 * static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) P(i, j) = (cond(i, j) + cond(j, i)) * inv2n;
  return P;
}

//! Output kernel matrix g_ij = k(||y_i - y_j||) with zero diagonal, plus
//! the ordered-pair normalizer S = sum_{k != l} g_kl.
struct OutputAffinities {
  Matrix g;
  double S = 0.0;
};

inline OutputAffinities output_affinities(const OutputKernel& kout,
                                          const Matrix& y) {
  std::size_t n = y.rows(), s = y.cols();
  OutputAffinities out;
  out.g = Matrix(n, n, 0.0);
  std::vector<double> row_sums(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      double g = kout.k(distance(y.row(i), y.row(j), s));
      out.g(i, j) = g;
      out.g(j, i) = g;
      acc += g;
    }
    row_sums[i] = acc;
  }
  out.S = 2.0 * ordered_sum(row_sums);
  return out;
}

//! Normalized output affinities Q_ij = g_ij / S.
inline Matrix normalized_affinities(const OutputAffinities& oa) {
  std::size_t n = oa.g.rows();
  require(oa.S > 0.0, errc::divergence, "output normalizer is zero");
  Matrix q(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) q(i, j) = oa.g(i, j) / oa.S;
  return q;
}

//! L = sum_{i != j} P_ij log(P_ij / Q_ij).  A vanished Q under positive P
//! means the embedding escaped the kernel's support; reported as divergence.
inline double kl_divergence(const Matrix& P, const OutputAffinities& oa) {
  std::size_t n = P.rows();
  require(oa.S > 0.0 && std::isfinite(oa.S), errc::divergence,
          "output normalizer is not positive");
  double logS = std::log(oa.S);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      double p = P(i, j);
      if (p <= 0.0) continue;
      double g = oa.g(i, j);
      if (g <= 0.0)
        throw Error(errc::divergence,
                    "output affinity vanished under positive target mass at "
                    "pair (" + std::to_string(i) + "," + std::to_string(j) + ")");
      loss += p * (std::log(p) - std::log(g) + logS);
    }
  return loss;
}

//! Reference gradient, O(n^2 s): row i accumulated serially over all j so
//! the result does not depend on the worker partition.
inline Matrix gradient(const Matrix& P, const Matrix& y,
                       const OutputKernel& kout) {
  std::size_t n = y.rows(), s = y.cols();
  OutputAffinities oa = output_affinities(kout, y);
  require(oa.S > 0.0, errc::divergence, "output normalizer is zero");
  double invS = 1.0 / oa.S;
  Matrix grad(n, s, 0.0);
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      double* gi = grad.row(i);
      const double* yi = y.row(i);
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double* yj = y.row(j);
        double r = distance(yi, yj, s);
        double q = oa.g(i, j) * invS;
        double coeff = -kGradientFactor * (P(i, j) - q) * kout.phi(r);
        for (std::size_t k = 0; k < s; ++k) gi[k] += coeff * (yi[k] - yj[k]);
      }
    }
  });
  return grad;
}

//! Largest Euclidean row norm, the descent stopping statistic.
inline double max_row_norm(const Matrix& m) {
  double best = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < m.cols(); ++k) s += m(i, k) * m(i, k);
    if (s > best) best = s;
  }
  return std::sqrt(best);
}

}  // namespace gtsne
