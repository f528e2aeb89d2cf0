#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "gtsne/kernels.hpp"
#include "gtsne/quadrature.hpp"

namespace gtsne {

namespace config {
constexpr double kPointwiseTol = 1e-9;       // sign checks on grids
constexpr double kTailThreshold = 1e-12;     // kernel mass treated as zero
constexpr double kDivergenceLevel = 27.631;  // -log(kTailThreshold)
constexpr std::size_t kGridSize = 512;       // per grid flavor (log + linear)
}  // namespace config

struct CheckResult {
  std::string id;
  bool pass = false;
  double witness = 0.0;  // offending abscissa or integral estimate
  std::string note;
};

//! Outcome of the numerical condition checks for one kernel (or a pair).
//! `overall` is the conjunction of `checks`; `informational` entries are
//! reported but never graded.
struct ValidationReport {
  std::vector<CheckResult> checks;
  std::vector<CheckResult> informational;
  bool overall = false;

  void finalize() {
    overall = true;
    for (const auto& c : checks) overall = overall && c.pass;
  }

  const CheckResult* find(const std::string& id) const {
    for (const auto& c : checks)
      if (c.id == id) return &c;
    for (const auto& c : informational)
      if (c.id == id) return &c;
    return nullptr;
  }
};

namespace detail {

//! Log-spaced plus linear abscissas on (0, hi]; covers both the origin
//! neighborhood and the tail.
inline std::vector<double> check_grid(double hi) {
  std::vector<double> g;
  g.reserve(2 * config::kGridSize);
  double lo = hi * 1e-9;
  double ratio = std::pow(hi / lo, 1.0 / (config::kGridSize - 1));
  double t = lo;
  for (std::size_t i = 0; i < config::kGridSize; ++i) {
    g.push_back(std::min(t, hi));
    t *= ratio;
  }
  for (std::size_t i = 1; i <= config::kGridSize; ++i)
    g.push_back(hi * static_cast<double>(i) / config::kGridSize);
  std::sort(g.begin(), g.end());
  return g;
}

}  // namespace detail

//! Grades the input profile against the admissibility conditions: positive
//! slope, divergence at infinity, the slope-convexity combination
//! w' + t w'' >= 0, and a finite moment integral for ambient dimension d.
inline ValidationReport validate_input_kernel(const InputKernel& kin,
                                              std::size_t d) {
  ValidationReport rep;

  double t_max = 1.0;
  bool covered = false;
  while (t_max <= 1e9) {
    double wt = kin.w(std::pow(t_max, kin.theta));
    if (std::isfinite(wt) && wt > config::kDivergenceLevel) {
      covered = true;
      break;
    }
    t_max *= 2.0;
  }
  {
    CheckResult c;
    c.id = "tail-coverage";
    c.pass = covered;
    c.witness = t_max;
    c.note = covered ? "exp(-w(t^theta)) < 1e-12 at t = " + format_sci(t_max)
                     : "kernel mass above 1e-12 out to t = 1e9; tail checks "
                       "are not conclusive";
    rep.checks.push_back(c);
  }
  if (!covered) t_max = 1e9;

  auto grid = detail::check_grid(t_max);

  {
    CheckResult c;
    c.id = "w-positivity";
    c.pass = true;
    double worst = std::numeric_limits<double>::infinity();
    for (double t : grid) {
      double s = kin.dw(t);
      if (!std::isfinite(s) || s <= 0.0) {
        c.pass = false;
        c.witness = t;
        worst = s;
        break;
      }
    }
    c.note = c.pass ? "w'(t) > 0 on grid"
                    : "w'(" + format_sci(c.witness) + ") = " + format_sci(worst);
    rep.checks.push_back(c);
  }

  {
    CheckResult c;
    c.id = "w-divergence";
    double t_div = 1.0;
    c.pass = false;
    while (t_div <= 1e15) {
      double wt = kin.w(t_div);
      if (std::isfinite(wt) && wt > config::kDivergenceLevel) {
        c.pass = true;
        break;
      }
      t_div *= 4.0;
    }
    c.witness = t_div;
    c.note = c.pass ? "w(t) exceeds " + format_sci(config::kDivergenceLevel) +
                          " by t = " + format_sci(t_div)
                    : "w stays below the divergence level out to t = 1e15";
    rep.checks.push_back(c);
  }

  {
    CheckResult c;
    c.id = "w-convexity";
    c.pass = true;
    for (double t : grid) {
      double v = kin.dw(t) + t * kin.d2w(t);
      if (!std::isfinite(v) || v < -config::kPointwiseTol) {
        c.pass = false;
        c.witness = t;
        c.note = "w' + t w'' = " + format_sci(v) + " at t = " + format_sci(t);
        break;
      }
    }
    if (c.pass) c.note = "w' + t w'' >= -1e-9 on grid";
    rep.checks.push_back(c);
  }

  {
    CheckResult c;
    c.id = "moment-integral";
    auto integrand = [&](double t) {
      double wt = kin.w(std::pow(t, kin.theta));
      double base = d >= 2 ? std::pow(t, static_cast<double>(d - 1)) : 1.0;
      double v = base * wt * std::exp(-wt);
      return std::isfinite(v) ? v : 1e300;
    };
    IntegralResult ir = improper_integral(integrand, 1e-9);
    c.pass = ir.converged && std::isfinite(ir.value);
    c.witness = ir.value;
    c.note = c.pass ? "moment integral = " + format_sci(ir.value)
                    : "moment integral does not converge";
    rep.checks.push_back(c);
  }

  rep.finalize();
  return rep;
}

//! Grades the output profile: monotone decay, boundedness by k_max,
//! bounded derivative, stationarity at the origin, and an integrable
//! radial profile.  The literal plane double integral is reported as an
//! informational entry only; it diverges for every admissible profile.
inline ValidationReport validate_output_kernel(const OutputKernel& kout) {
  ValidationReport rep;

  double r_max = 1.0;
  while (r_max <= 1e9) {
    double v = kout.k(r_max);
    if (std::isfinite(v) && v < config::kTailThreshold * kout.k_max) break;
    r_max *= 2.0;
  }
  if (r_max > 1e9) r_max = 1e9;
  auto grid = detail::check_grid(r_max);

  {
    CheckResult c;
    c.id = "k-monotone";
    c.pass = true;
    double prev = kout.k(0.0);
    for (double r : grid) {
      double v = kout.k(r);
      if (!std::isfinite(v) ||
          v > prev + config::kPointwiseTol * kout.k_max) {
        c.pass = false;
        c.witness = r;
        c.note = "k increases near r = " + format_sci(r);
        break;
      }
      prev = v;
    }
    if (c.pass) c.note = "k non-increasing on grid";
    rep.checks.push_back(c);
  }

  {
    CheckResult c;
    c.id = "k-bounded";
    c.pass = true;
    double worst = kout.k(0.0);
    for (double r : grid) worst = std::max(worst, kout.k(r));
    c.witness = worst;
    c.pass = std::isfinite(worst) &&
             worst <= kout.k_max + config::kPointwiseTol;
    c.note = "max k on grid = " + format_sci(worst) +
             ", bound = " + format_sci(kout.k_max);
    rep.checks.push_back(c);
  }

  {
    CheckResult c;
    c.id = "kprime-bounded";
    c.pass = true;
    double worst = 0.0;
    for (double r : grid) {
      double v = kout.dk(r);
      if (!std::isfinite(v)) {
        c.pass = false;
        c.witness = r;
        break;
      }
      worst = std::max(worst, std::abs(v));
    }
    if (c.pass) {
      c.witness = worst;
      c.note = "max |k'| on grid = " + format_sci(worst);
    } else {
      c.note = "k' non-finite at r = " + format_sci(c.witness);
    }
    rep.checks.push_back(c);
  }

  {
    CheckResult c;
    c.id = "kprime-zero-at-origin";
    double v = kout.dk(0.0);
    c.pass = std::isfinite(v) && std::abs(v) <= config::kPointwiseTol;
    c.witness = v;
    c.note = "k'(0) = " + format_sci(v);
    rep.checks.push_back(c);
  }

  {
    CheckResult c;
    c.id = "radial-integral";
    IntegralResult ir = improper_integral(
        [&](double r) {
          double v = kout.k(r);
          return std::isfinite(v) ? v : 1e300;
        },
        1e-9);
    c.pass = ir.converged && std::isfinite(ir.value);
    c.witness = ir.value;
    c.note = c.pass ? "radial integral = " + format_sci(ir.value)
                    : "radial integral does not converge";
    rep.checks.push_back(c);
  }

  {
    CheckResult c;
    c.id = "literal-double-integral";
    // Coarse tolerances and shallow refinement: the inner value carries
    // quadrature noise, so a tight outer tolerance would never be met.
    auto inner = [&](double y) {
      IntegralResult ir = improper_integral(
          [&](double yp) { return kout.k(std::abs(y - yp)); }, 1e-3, 32, 10);
      return ir.converged ? ir.value : 1e300;
    };
    IntegralResult outer = improper_integral(inner, 1e-3, 16, 8);
    c.pass = outer.converged && std::isfinite(outer.value);
    c.witness = outer.value;
    c.note = c.pass ? "plane integral = " + format_sci(outer.value)
                    : "plane integral diverges (expected for admissible "
                      "kernels); not graded";
    rep.informational.push_back(c);
  }

  rep.finalize();
  return rep;
}

//! Merged report for a config: input checks prefixed "input.", output
//! checks prefixed "output.".
inline ValidationReport validate_kernel_config(const KernelConfig& cfg,
                                               std::size_t d) {
  ValidationReport in = validate_input_kernel(cfg.input, d);
  ValidationReport out = validate_output_kernel(cfg.output);
  ValidationReport rep;
  for (auto c : in.checks) {
    c.id = "input." + c.id;
    rep.checks.push_back(std::move(c));
  }
  for (auto c : out.checks) {
    c.id = "output." + c.id;
    rep.checks.push_back(std::move(c));
  }
  for (auto c : out.informational) {
    c.id = "output." + c.id;
    rep.informational.push_back(std::move(c));
  }
  rep.finalize();
  return rep;
}

}  // namespace gtsne
