#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "gtsne/affinity.hpp"
#include "gtsne/calibration.hpp"
#include "gtsne/core.hpp"
#include "gtsne/errors.hpp"
#include "gtsne/kernels.hpp"
#include "gtsne/parallel.hpp"

namespace gtsne {

struct OptimizerConfig {
  std::size_t iterations = 1000;
  double learning_rate = 0.0;  // <= 0 selects n, see resolve_learning_rate
  double momentum = 0.5;
  std::uint64_t seed = 0;
  double init_scale = 1e-2;
  double stop_tol = 1e-7;  // on the gradient max row norm
};

//! Loss trace entry; loss and gradient norm are evaluated at the start of
//! the iteration, before the position update.
struct TraceRow {
  std::size_t iteration;
  double loss;
  double grad_norm;
};

struct Embedding {
  Matrix y;
  std::vector<TraceRow> trace;
  double loss = 0.0;
  double grad_norm = 0.0;
  std::size_t iterations_run = 0;
  bool converged = false;
};

//! Deterministic standard normals: explicit Box-Muller over mt19937_64 so
//! streams do not depend on the standard library's distribution choices.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : rng_(seed) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    double u2 = uniform01();
    double m = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = m * std::sin(a);
    have_spare_ = true;
    return m * std::cos(a);
  }

 private:
  double uniform01() { return (rng_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

//! Centered Gaussian start: i.i.d. N(0, scale^2) entries with column means
//! removed, so the embedding begins at the centroid the dynamics preserve.
inline Matrix initialize_embedding(std::size_t n, std::size_t s,
                                   std::uint64_t seed, double scale) {
  require(n >= 1 && s >= 1, errc::invalid_input, "empty embedding shape");
  require(std::isfinite(scale) && scale > 0.0, errc::invalid_input,
          "init scale must be positive");
  NormalSampler normal(seed);
  Matrix y(n, s);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < s; ++k) y(i, k) = scale * normal();
  for (std::size_t k = 0; k < s; ++k) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += y(i, k);
    mean /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) y(i, k) -= mean;
  }
  return y;
}

inline double resolve_learning_rate(const OptimizerConfig& cfg, std::size_t n) {
  if (cfg.learning_rate > 0.0) return cfg.learning_rate;
  return static_cast<double>(n);
}

namespace detail {

//! Kernel profiles for the descent inner loops.  Each maps a squared
//! distance to the kernel value, its log, and phi = k'/(r k).
struct CauchyUnitProfile {
  double g(double r2) const { return 1.0 / (1.0 + r2); }
  double log_g(double g_, double r2) const { (void)g_; return -std::log1p(r2); }
  double phi(double g_, double r2) const { (void)r2; return -2.0 * g_; }
};

struct CauchyProfile {
  double b;
  double g(double r2) const { return std::pow(1.0 + r2, -b); }
  double log_g(double g_, double r2) const { (void)g_; return -b * std::log1p(r2); }
  double phi(double g_, double r2) const { (void)g_; return -2.0 * b / (1.0 + r2); }
};

struct GaussProfile {
  double g(double r2) const { return std::exp(-r2); }
  double log_g(double g_, double r2) const { (void)g_; return -r2; }
  double phi(double g_, double r2) const { (void)g_; (void)r2; return -2.0; }
};

struct GenericProfile {
  const OutputKernel* kout;
  double g(double r2) const { return kout->k(std::sqrt(r2)); }
  double log_g(double g_, double r2) const { (void)r2; return std::log(g_); }
  double phi(double g_, double r2) const { (void)g_; return kout->phi(std::sqrt(r2)); }
};

//! One fused objective evaluation: S and the cross term come from a
//! triangle pass with per-row partials combined in index order; gradient
//! rows are then each accumulated by a full serial scan, so results do not
//! depend on the worker partition.
template <class Profile>
void eval_loss_grad(const Matrix& P, const Matrix& y, const Profile& prof,
                    double p_log_p, Matrix& grad, double& loss,
                    double& grad_norm) {
  std::size_t n = y.rows(), s = y.cols();
  std::vector<double> row_S(n, 0.0), row_cross(n, 0.0);
  parallel_for(n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const double* yi = y.row(i);
      const double* pi = P.row(i);
      double accS = 0.0, accX = 0.0;
      for (std::size_t j = i + 1; j < n; ++j) {
        double r2 = squared_distance(yi, y.row(j), s);
        double g = prof.g(r2);
        accS += g;
        accX += pi[j] * prof.log_g(g, r2);
      }
      row_S[i] = accS;
      row_cross[i] = accX;
    }
  });
  double S = 2.0 * ordered_sum(row_S);
  double cross = 2.0 * ordered_sum(row_cross);
  loss = p_log_p - cross + std::log(S);

  double invS = 1.0 / S;
  std::vector<double> row_norm2(n, 0.0);
  parallel_for(n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const double* yi = y.row(i);
      const double* pi = P.row(i);
      double* gi = grad.row(i);
      for (std::size_t k = 0; k < s; ++k) gi[k] = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double* yj = y.row(j);
        double r2 = squared_distance(yi, yj, s);
        double g = prof.g(r2);
        double coeff = -kGradientFactor * (pi[j] - g * invS) * prof.phi(g, r2);
        for (std::size_t k = 0; k < s; ++k) gi[k] += coeff * (yi[k] - yj[k]);
      }
      double nrm = 0.0;
      for (std::size_t k = 0; k < s; ++k) nrm += gi[k] * gi[k];
      row_norm2[i] = nrm;
    }
  });
  double best = 0.0;
  for (double v : row_norm2) best = std::max(best, v);
  grad_norm = std::sqrt(best);
}

template <class Fn>
auto dispatch_profile(const OutputKernel& kout, Fn&& fn) {
  switch (kout.family) {
    case OutputFamily::cauchy:
      if (kout.b == 1.0) return fn(CauchyUnitProfile{});
      return fn(CauchyProfile{kout.b});
    case OutputFamily::gauss:
      return fn(GaussProfile{});
    default:
      return fn(GenericProfile{&kout});
  }
}

}  // namespace detail

//! Gradient descent with momentum on L = sum P log(P/Q).  Stops when the
//! gradient max row norm drops below stop_tol or iterations run out; a
//! non-finite state names the iteration that produced it.
inline Embedding run_descent(const Matrix& P, const OutputKernel& kout,
                             std::size_t s, const OptimizerConfig& cfg) {
  std::size_t n = P.rows();
  require(n >= 2, errc::invalid_input, "need at least two points");
  require(cfg.momentum >= 0.0 && cfg.momentum < 1.0, errc::invalid_input,
          "momentum must lie in [0, 1)");
  double lr = resolve_learning_rate(cfg, n);

  double p_log_p = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double p = P(i, j);
      if (p > 0.0) p_log_p += p * std::log(p);
    }

  Embedding emb;
  emb.y = initialize_embedding(n, s, cfg.seed, cfg.init_scale);
  Matrix grad(n, s), velocity(n, s, 0.0);
  emb.trace.reserve(cfg.iterations + 1);

  // Evaluate, record, stop or update; one trailing evaluation when the
  // budget runs out keeps loss/grad_norm in sync with the returned y.
  detail::dispatch_profile(kout, [&](auto prof) {
    for (std::size_t it = 0; it <= cfg.iterations; ++it) {
      double loss = 0.0, gnorm = 0.0;
      detail::eval_loss_grad(P, emb.y, prof, p_log_p, grad, loss, gnorm);
      if (!std::isfinite(loss) || !std::isfinite(gnorm))
        throw Error(errc::divergence,
                    "non-finite objective at iteration " + std::to_string(it));
      emb.trace.push_back({it, loss, gnorm});
      emb.loss = loss;
      emb.grad_norm = gnorm;
      emb.iterations_run = it + 1;
      if (gnorm < cfg.stop_tol) {
        emb.converged = true;
        return;
      }
      if (it == cfg.iterations) return;
      for (std::size_t idx = 0; idx < n * s; ++idx) {
        velocity.data()[idx] =
            cfg.momentum * velocity.data()[idx] - lr * grad.data()[idx];
        emb.y.data()[idx] += velocity.data()[idx];
      }
      if (!emb.y.all_finite())
        throw Error(errc::divergence,
                    "non-finite embedding at iteration " + std::to_string(it));
    }
  });
  return emb;
}

struct TsneResult {
  std::vector<SigmaResult> sigmas;
  Matrix P;
  Embedding embedding;
};

//! Full pipeline: calibrate scales, symmetrize affinities, descend.
inline TsneResult run_tsne(const Matrix& x, const KernelConfig& kernels,
                           double rho, std::size_t s,
                           const OptimizerConfig& cfg) {
  TsneResult res;
  res.sigmas = calibrate_all(kernels.input, x, rho);
  res.P = joint_affinities(kernels.input, x, res.sigmas);
  res.embedding = run_descent(res.P, kernels.output, s, cfg);
  return res;
}

//! Scaled per-point equilibrium residuals: with the diagonal-corrected
//! empirical densities p_n = n^2 P_ij and q_n = n^2 Q_ij, the stationarity
//! row residual equals (n / c) times the loss gradient row norm.
inline std::vector<double> stationarity_residuals(const Matrix& P,
                                                  const Matrix& y,
                                                  const OutputKernel& kout) {
  Matrix grad = gradient(P, y, kout);
  std::size_t n = y.rows();
  std::vector<double> r(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s2 = 0.0;
    for (std::size_t k = 0; k < grad.cols(); ++k)
      s2 += grad(i, k) * grad(i, k);
    r[i] = static_cast<double>(n) / kGradientFactor * std::sqrt(s2);
  }
  return r;
}

}  // namespace gtsne
