#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "gtsne/affinity.hpp"
#include "gtsne/calibration.hpp"
#include "gtsne/continuum.hpp"
#include "gtsne/core.hpp"
#include "gtsne/descent.hpp"
#include "gtsne/errors.hpp"
#include "gtsne/io.hpp"
#include "gtsne/kernels.hpp"
#include "gtsne/svg.hpp"
#include "gtsne/validation.hpp"

namespace gtsne {

//! Declarative measure description; builds quadrature measures at any
//! resolution and drives the matching sampler.
struct MeasureSpec {
  std::string family;  // uniform-box | trunc-gauss | mixture
  std::vector<double> lo, hi;
  std::vector<double> mean, stddev;  // trunc-gauss
  std::vector<MeasureSpec> components;
  std::vector<double> component_weights;
  std::size_t axis_nodes = 0;  // 0 picks the dimension default
};

inline ContinuumMeasure to_measure(const MeasureSpec& spec,
                                   std::size_t resolution_multiplier = 1) {
  require(resolution_multiplier >= 1, errc::config,
          "resolution multiplier must be positive");
  auto nodes = [&](std::size_t dim) {
    std::size_t base =
        spec.axis_nodes ? spec.axis_nodes : detail::default_axis_nodes(dim);
    return base * resolution_multiplier;
  };
  if (spec.family == "uniform-box")
    return uniform_box(spec.lo, spec.hi, nodes(spec.lo.size()));
  if (spec.family == "trunc-gauss")
    return trunc_gauss(spec.mean, spec.stddev, spec.lo, spec.hi,
                       nodes(spec.mean.size()));
  if (spec.family == "mixture") {
    std::vector<ContinuumMeasure> parts;
    parts.reserve(spec.components.size());
    for (const auto& c : spec.components)
      parts.push_back(to_measure(c, resolution_multiplier));
    return mixture(parts, spec.component_weights);
  }
  throw Error(errc::config, "unsupported measure family '" + spec.family + "'");
}

namespace detail {

inline double uniform01(std::mt19937_64& rng) {
  return (rng() >> 11) * 0x1.0p-53;
}

inline void sample_into(const MeasureSpec& spec, std::mt19937_64& rng,
                        NormalSampler& normal, double* out) {
  if (spec.family == "uniform-box") {
    for (std::size_t k = 0; k < spec.lo.size(); ++k)
      out[k] = spec.lo[k] + (spec.hi[k] - spec.lo[k]) * uniform01(rng);
    return;
  }
  if (spec.family == "trunc-gauss") {
    std::size_t dim = spec.mean.size();
    for (unsigned attempt = 0; attempt < 100000; ++attempt) {
      bool inside = true;
      for (std::size_t k = 0; k < dim; ++k) {
        out[k] = spec.mean[k] + spec.stddev[k] * normal();
        if (out[k] < spec.lo[k] || out[k] > spec.hi[k]) inside = false;
      }
      if (inside) return;
    }
    throw Error(errc::config, "truncation box rejects essentially all mass");
  }
  if (spec.family == "mixture") {
    double u = uniform01(rng);
    double acc = 0.0;
    for (std::size_t c = 0; c < spec.components.size(); ++c) {
      acc += spec.component_weights[c];
      if (u < acc || c + 1 == spec.components.size()) {
        sample_into(spec.components[c], rng, normal, out);
        return;
      }
    }
  }
  throw Error(errc::config, "unsupported measure family '" + spec.family + "'");
}

inline std::size_t spec_dim(const MeasureSpec& spec) {
  if (spec.family == "uniform-box") return spec.lo.size();
  if (spec.family == "trunc-gauss") return spec.mean.size();
  if (spec.family == "mixture") {
    require(!spec.components.empty(), errc::config, "empty mixture");
    return spec_dim(spec.components.front());
  }
  throw Error(errc::config, "unsupported measure family '" + spec.family + "'");
}

}  // namespace detail

//! Draws n i.i.d. points from the spec; deterministic in the seed.
inline Matrix sample_measure(const MeasureSpec& spec, std::size_t n,
                             std::uint64_t seed) {
  to_measure(spec);  // validates the spec eagerly
  std::size_t d = detail::spec_dim(spec);
  std::mt19937_64 rng(seed);
  NormalSampler normal(seed ^ 0x9e3779b97f4a7c15ull);
  Matrix x(n, d);
  for (std::size_t i = 0; i < n; ++i)
    detail::sample_into(spec, rng, normal, x.row(i));
  return x;
}

struct StudyConfig {
  MeasureSpec measure;
  std::vector<std::size_t> n_grid;
  std::vector<std::uint64_t> seeds;
  double rho = 0.3;
  KernelConfig kernels;
  OptimizerConfig optimizer;
  std::size_t embed_dim = 2;
  std::filesystem::path output_dir;
  double stationarity_target = 1e-5;  // drives the scaled stop tolerance
  std::size_t f_grid_points = 16;
  std::size_t reference_multiplier = 4;  // quadrature refinement for truth
};

struct StudyRow {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double d_n_rho = 0.0;
  double sup_sigma_dev = 0.0;
  double sup_F_dev = 0.0;
  double diameter = 0.0;
  double entropy_expansion_residual = 0.0;
  double I_empirical = 0.0;
  double max_stationarity_residual = 0.0;
  std::string error;  // errc tag; empty on success
};

inline std::string study_csv(const std::vector<StudyRow>& rows) {
  std::string out =
      "n,seed,d-n-rho,sup-sigma-dev,sup-F-dev,diameter,"
      "entropy-expansion-residual,I-empirical,max-stationarity-residual,"
      "error\n";
  for (const auto& r : rows) {
    out += std::to_string(r.n) + "," + std::to_string(r.seed) + "," +
           format_double(r.d_n_rho) + "," + format_double(r.sup_sigma_dev) +
           "," + format_double(r.sup_F_dev) + "," +
           format_double(r.diameter) + "," +
           format_double(r.entropy_expansion_residual) + "," +
           format_double(r.I_empirical) + "," +
           format_double(r.max_stationarity_residual) + "," + r.error + "\n";
  }
  return out;
}

inline void emit_csv(const std::vector<StudyRow>& rows,
                     const std::filesystem::path& path) {
  atomic_write(path, study_csv(rows));
}

inline void emit_svg(const std::vector<Series>& series,
                     const std::filesystem::path& path) {
  atomic_write(path, render_svg(series, "n", "normalized metric"));
}

inline double median(std::vector<double> v) {
  require(!v.empty(), errc::invalid_input, "median of empty set");
  std::sort(v.begin(), v.end());
  std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

//! Medians of one metric across seeds, ordered along the n-grid; error
//! rows are skipped.
inline std::vector<double> medians_by_n(
    const std::vector<StudyRow>& rows, const std::vector<std::size_t>& n_grid,
    double StudyRow::*metric) {
  std::vector<double> out;
  for (std::size_t n : n_grid) {
    std::vector<double> vals;
    for (const auto& r : rows)
      if (r.n == n && r.error.empty()) vals.push_back(r.*metric);
    out.push_back(median(vals));
  }
  return out;
}

//! Trend check with multiplicative slack: v[k+1] <= (1 + slack) v[k].
inline bool non_increasing_with_slack(const std::vector<double>& v,
                                      double slack = 0.2) {
  for (std::size_t k = 0; k + 1 < v.size(); ++k)
    if (v[k + 1] > (1.0 + slack) * v[k]) return false;
  return true;
}

//! Full pipeline plus diagnostics for one (n, seed) cell.
inline StudyRow study_cell(const StudyConfig& cfg, const ContinuumMeasure& ref,
                           std::size_t n, std::uint64_t seed) {
  StudyRow row;
  row.n = n;
  row.seed = seed;

  const InputKernel& kin = cfg.kernels.input;
  const OutputKernel& kout = cfg.kernels.output;

  Matrix x = sample_measure(cfg.measure, n, seed);
  auto sig = calibrate_all(kin, x, cfg.rho);
  Matrix P = joint_affinities(kin, x, sig);

  OptimizerConfig oc = cfg.optimizer;
  oc.seed = seed;
  double scaled_tol =
      kGradientFactor * cfg.stationarity_target / static_cast<double>(n);
  oc.stop_tol = oc.stop_tol > 0.0 ? std::min(oc.stop_tol, scaled_tol)
                                  : scaled_tol;
  Embedding emb = run_descent(P, kout, cfg.embed_dim, oc);

  row.d_n_rho = emb.loss;
  row.diameter = diameter(emb.y);

  std::vector<double> sigma_values(n);
  for (std::size_t i = 0; i < n; ++i) sigma_values[i] = sig[i].sigma;

  double sup_sigma = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double star = sigma_star(ref, kin, cfg.rho, x.row(i)).sigma;
    sup_sigma = std::max(sup_sigma, std::abs(sigma_values[i] - star));
  }
  row.sup_sigma_dev = sup_sigma;

  double s_lo = *std::min_element(sigma_values.begin(), sigma_values.end());
  double s_hi = *std::max_element(sigma_values.begin(), sigma_values.end());
  if (s_hi <= s_lo) s_hi = s_lo * (1.0 + 1e-9);
  double sup_f = 0.0;
  std::size_t gpts = std::max<std::size_t>(cfg.f_grid_points, 2);
  for (std::size_t gi = 0; gi < gpts; ++gi) {
    double t = static_cast<double>(gi) / static_cast<double>(gpts - 1);
    double sg = s_lo * std::pow(s_hi / s_lo, t);
    for (std::size_t i = 0; i < n; ++i) {
      double dev = std::abs(empirical_F(kin, x, i, sg, cfg.rho) -
                            big_F(ref, kin, cfg.rho, x.row(i), sg));
      sup_f = std::max(sup_f, dev);
    }
  }
  row.sup_F_dev = sup_f;

  Matrix p_psi_m = p_psi_matrix(kin, x, sigma_values);
  row.entropy_expansion_residual = entropy_expansion_residual(P, p_psi_m);
  row.I_empirical =
      detail::relative_entropy_mean(p_psi_m, q_matrix(kout, emb.y));

  auto resid = stationarity_residuals(P, emb.y, kout);
  row.max_stationarity_residual =
      *std::max_element(resid.begin(), resid.end());

  if (!cfg.output_dir.empty()) {
    auto dir = cfg.output_dir / std::to_string(n) / std::to_string(seed);
    atomic_write(dir / "embedding.csv", points_to_csv(emb.y));
    std::string trace = "iteration,loss,grad-norm\n";
    for (const auto& t : emb.trace)
      trace += std::to_string(t.iteration) + "," + format_double(t.loss) +
               "," + format_double(t.grad_norm) + "\n";
    atomic_write(dir / "trace.csv", trace);
  }
  return row;
}

//! Runs every (n, seed) cell, records failures as tagged rows, and emits
//! rows.csv plus a median-trend summary plot.
inline std::vector<StudyRow> convergence_study(const StudyConfig& cfg) {
  require(!cfg.n_grid.empty() && !cfg.seeds.empty(), errc::config,
          "study needs a nonempty n-grid and seed list");
  for (std::size_t k = 0; k + 1 < cfg.n_grid.size(); ++k)
    require(cfg.n_grid[k] < cfg.n_grid[k + 1], errc::config,
            "n-grid must be strictly increasing");
  for (std::size_t n : cfg.n_grid)
    require(static_cast<double>(n) * cfg.rho > 1.0, errc::config,
            "each n * rho must exceed 1");
  if (!validate_input_kernel(cfg.kernels.input, detail::spec_dim(cfg.measure))
           .overall)
    throw Error(errc::kernel_invalid, "input kernel fails validation");
  if (!validate_output_kernel(cfg.kernels.output).overall)
    throw Error(errc::kernel_invalid, "output kernel fails validation");

  ContinuumMeasure ref = to_measure(cfg.measure, cfg.reference_multiplier);

  std::vector<StudyRow> rows;
  for (std::size_t n : cfg.n_grid)
    for (std::uint64_t seed : cfg.seeds) {
      StudyRow row;
      try {
        row = study_cell(cfg, ref, n, seed);
      } catch (const Error& e) {
        row.n = n;
        row.seed = seed;
        row.error = errc_name(e.code());
      }
      rows.push_back(row);
    }

  if (!cfg.output_dir.empty()) {
    emit_csv(rows, cfg.output_dir / "rows.csv");
    std::vector<Series> series;
    auto add = [&](const std::string& label, double StudyRow::*metric) {
      Series s;
      s.label = label;
      for (std::size_t n : cfg.n_grid) {
        std::vector<double> vals;
        for (const auto& r : rows)
          if (r.n == n && r.error.empty()) vals.push_back(r.*metric);
        if (!vals.empty()) {
          s.x.push_back(static_cast<double>(n));
          s.y.push_back(median(vals));
        }
      }
      if (!s.x.empty()) series.push_back(std::move(s));
    };
    add("d-n-rho", &StudyRow::d_n_rho);
    add("sup-sigma-dev", &StudyRow::sup_sigma_dev);
    add("sup-F-dev", &StudyRow::sup_F_dev);
    add("diameter", &StudyRow::diameter);
    add("entropy-expansion-residual", &StudyRow::entropy_expansion_residual);
    add("I-empirical", &StudyRow::I_empirical);
    add("max-stationarity-residual", &StudyRow::max_stationarity_residual);
    emit_svg(series, cfg.output_dir / "summary.svg");
  }
  return rows;
}

}  // namespace gtsne
