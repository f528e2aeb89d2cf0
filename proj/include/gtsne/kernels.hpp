#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "gtsne/core.hpp"
#include "gtsne/errors.hpp"

namespace gtsne {

enum class InputFamily { power, logpoly, custom };
enum class OutputFamily { cauchy, gauss, exponential, custom };

//! Input similarity profile: K_in(x, x', sigma) = exp(-w(sigma * ||x-x'||^theta)).
//! w is normalized so that w(0) = 0; custom profiles are shifted by w(0) at
//! construction, which rescales every conditional distribution by a constant
//! and therefore changes nothing downstream.
struct InputKernel {
  std::string id;
  InputFamily family = InputFamily::custom;
  std::vector<double> params;
  double theta = 2.0;

  double a = 1.0;  // power exponent or log profile gain, by family
  std::function<double(double)> w_fn, dw_fn, d2w_fn;
  double shift = 0.0;

  double w(double t) const {
    switch (family) {
      case InputFamily::power: return a == 1.0 ? t : std::pow(t, a);
      case InputFamily::logpoly: return a * std::log1p(t);
      case InputFamily::custom: return w_fn(t) - shift;
    }
    return 0.0;
  }

  double dw(double t) const {
    switch (family) {
      case InputFamily::power:
        return a == 1.0 ? 1.0 : a * std::pow(t, a - 1.0);
      case InputFamily::logpoly: return a / (1.0 + t);
      case InputFamily::custom: return dw_fn(t);
    }
    return 0.0;
  }

  double d2w(double t) const {
    switch (family) {
      case InputFamily::power:
        if (a == 1.0) return 0.0;
        return a * (a - 1.0) * std::pow(t, a - 2.0);
      case InputFamily::logpoly:
        return -a / ((1.0 + t) * (1.0 + t));
      case InputFamily::custom:
        return d2w_fn(t);
    }
    return 0.0;
  }
};

//! Output similarity profile: K_out(y, y') = k(||y-y'||).
struct OutputKernel {
  std::string id;
  OutputFamily family = OutputFamily::custom;
  std::vector<double> params;
  double k_max = 1.0;

  double b = 1.0;  // cauchy tail exponent
  std::function<double(double)> k_fn, dk_fn;

  double k(double r) const {
    switch (family) {
      case OutputFamily::cauchy:
        return b == 1.0 ? 1.0 / (1.0 + r * r)
                        : std::pow(1.0 + r * r, -b);
      case OutputFamily::gauss: return std::exp(-r * r);
      case OutputFamily::exponential: return std::exp(-r);
      case OutputFamily::custom: return k_fn(r);
    }
    return 0.0;
  }

  double dk(double r) const {
    switch (family) {
      case OutputFamily::cauchy:
        return b == 1.0 ? -2.0 * r / ((1.0 + r * r) * (1.0 + r * r))
                        : -2.0 * b * r * std::pow(1.0 + r * r, -b - 1.0);
      case OutputFamily::gauss: return -2.0 * r * std::exp(-r * r);
      case OutputFamily::exponential: return -std::exp(-r);
      case OutputFamily::custom: return dk_fn(r);
    }
    return 0.0;
  }

  double k0() const { return k(0.0); }

  //! phi(r) = k'(r) / (r * k(r)), the scalar factor multiplying (y_i - y_j)
  //! in the gradient after dividing by the kernel value.  Finite at r = 0
  //! whenever k'(0) = 0; closed forms avoid the 0/0 for the builtins.
  double phi(double r) const {
    switch (family) {
      case OutputFamily::cauchy: return -2.0 * b / (1.0 + r * r);
      case OutputFamily::gauss: return -2.0;
      case OutputFamily::exponential:
      case OutputFamily::custom: {
        double rr = r < 1e-12 ? 1e-12 : r;
        return dk(rr) / (rr * k(rr));
      }
    }
    return 0.0;
  }
};

struct KernelConfig {
  InputKernel input;
  OutputKernel output;
};

inline InputKernel power_input(double a, double theta) {
  if (!(a >= 1.0) || !std::isfinite(a))
    throw Error(errc::kernel_definition, "power input requires a >= 1");
  if (!(theta > 0.0) || !std::isfinite(theta))
    throw Error(errc::kernel_definition, "input kernel requires theta > 0");
  InputKernel k;
  k.family = InputFamily::power;
  k.a = a;
  k.theta = theta;
  k.params = {a, theta};
  k.id = "power(a=" + std::to_string(a) + ",theta=" + std::to_string(theta) + ")";
  return k;
}

inline InputKernel logpoly_input(double alpha, double theta) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw Error(errc::kernel_definition, "log-poly input requires alpha > 0");
  if (!(theta > 0.0) || !std::isfinite(theta))
    throw Error(errc::kernel_definition, "input kernel requires theta > 0");
  InputKernel k;
  k.family = InputFamily::logpoly;
  k.a = alpha;
  k.theta = theta;
  k.params = {alpha, theta};
  k.id = "log-poly(alpha=" + std::to_string(alpha) +
         ",theta=" + std::to_string(theta) + ")";
  return k;
}

//! Gaussian-form input: w(t) = t with theta = 2, so K_in = exp(-sigma d^2).
inline InputKernel gaussian_input() { return power_input(1.0, 2.0); }

inline InputKernel make_custom_input(std::string id,
                                     std::function<double(double)> w,
                                     std::function<double(double)> dw,
                                     std::function<double(double)> d2w,
                                     double theta) {
  if (!(theta > 0.0) || !std::isfinite(theta))
    throw Error(errc::kernel_definition, "input kernel requires theta > 0");
  InputKernel k;
  k.family = InputFamily::custom;
  k.theta = theta;
  k.params = {theta};
  k.id = std::move(id);
  k.w_fn = std::move(w);
  k.dw_fn = std::move(dw);
  k.d2w_fn = std::move(d2w);
  double w0 = k.w_fn(0.0);
  if (!std::isfinite(w0))
    throw Error(errc::kernel_definition, "custom input: w(0) is not finite");
  k.shift = w0;
  return k;
}

//! Bounded profile violating both divergence and the slope condition;
//! kept for validator negative tests.
inline InputKernel arctan_input(double theta = 1.0) {
  return make_custom_input(
      "arctan(theta=" + std::to_string(theta) + ")",
      [](double t) { return std::atan(t); },
      [](double t) { return 1.0 / (1.0 + t * t); },
      [](double t) {
        double u = 1.0 + t * t;
        return -2.0 * t / (u * u);
      },
      theta);
}

inline OutputKernel cauchy_output(double b = 1.0) {
  if (!(b > 0.0) || !std::isfinite(b))
    throw Error(errc::kernel_definition, "cauchy output requires b > 0");
  OutputKernel k;
  k.family = OutputFamily::cauchy;
  k.b = b;
  k.params = {b};
  k.k_max = 1.0;
  k.id = "cauchy(b=" + std::to_string(b) + ")";
  return k;
}

inline OutputKernel gauss_output() {
  OutputKernel k;
  k.family = OutputFamily::gauss;
  k.k_max = 1.0;
  k.id = "gauss";
  return k;
}

//! k'(0) = -1, so this profile fails the stationary-at-origin condition;
//! kept for validator negative tests.
inline OutputKernel exp_output() {
  OutputKernel k;
  k.family = OutputFamily::exponential;
  k.k_max = 1.0;
  k.id = "exp";
  return k;
}

inline OutputKernel make_custom_output(std::string id,
                                       std::function<double(double)> k,
                                       std::function<double(double)> dk,
                                       double k_max) {
  if (!(k_max > 0.0) || !std::isfinite(k_max))
    throw Error(errc::kernel_definition, "custom output requires k_max > 0");
  OutputKernel out;
  out.family = OutputFamily::custom;
  out.k_max = k_max;
  out.id = std::move(id);
  out.k_fn = std::move(k);
  out.dk_fn = std::move(dk);
  return out;
}

//! K_in(x, x', sigma) for points of dimension d.
inline double eval_input(const InputKernel& kin, const double* x,
                         const double* xp, double sigma, std::size_t d) {
  double r = distance(x, xp, d);
  return std::exp(-kin.w(sigma * std::pow(r, kin.theta)));
}

//! K_out(y, y') for points of dimension s.
inline double eval_output(const OutputKernel& kout, const double* y,
                          const double* yp, std::size_t s) {
  return kout.k(distance(y, yp, s));
}

}  // namespace gtsne
