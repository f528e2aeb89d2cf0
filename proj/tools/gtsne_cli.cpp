#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gtsne/gtsne.hpp"
#include "gtsne/json_config.hpp"

namespace {

int exit_code_for(const gtsne::Error& e) {
  switch (e.code()) {
    case gtsne::errc::config: return 2;
    case gtsne::errc::io: return 3;
    default: return 1;
  }
}

std::string sigma_table_csv(const std::vector<gtsne::SigmaResult>& sig) {
  std::string out = "index,sigma,residual,iterations\n";
  for (std::size_t i = 0; i < sig.size(); ++i)
    out += std::to_string(i) + "," + gtsne::format_double(sig[i].sigma) + "," +
           gtsne::format_double(sig[i].residual) + "," +
           std::to_string(sig[i].iterations) + "\n";
  return out;
}

std::string trace_csv(const gtsne::Embedding& emb) {
  std::string out = "iteration,loss,grad-norm\n";
  for (const auto& t : emb.trace)
    out += std::to_string(t.iteration) + "," + gtsne::format_double(t.loss) +
           "," + gtsne::format_double(t.grad_norm) + "\n";
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"Generalized-kernel t-SNE: validation, calibration, "
               "embedding, continuum diagnostics, convergence studies"};
  app.require_subcommand(1);

  // validate-kernel
  auto* vk = app.add_subcommand(
      "validate-kernel", "Grade a kernel config against the admissibility "
                         "conditions and print the report as JSON");
  std::string vk_config;
  std::size_t vk_dim = 2;
  vk->add_option("--config", vk_config, "kernel config JSON")->required();
  vk->add_option("--dim", vk_dim, "ambient dimension for the moment check");

  // calibrate
  auto* cal = app.add_subcommand(
      "calibrate", "Solve the per-point entropy equation and write the "
                   "sigma table");
  std::string cal_input, cal_config, cal_out;
  double cal_rho = 0.0;
  cal->add_option("--input", cal_input, "points CSV")->required();
  cal->add_option("--config", cal_config, "kernel config JSON")->required();
  cal->add_option("--rho", cal_rho, "perplexity ratio in (0,1)")->required();
  cal->add_option("--out", cal_out, "output CSV path")->required();

  // embed
  auto* em = app.add_subcommand(
      "embed", "Run the full pipeline and write embedding, trace, sigma "
               "table and metadata");
  std::string em_input, em_config, em_out;
  double em_rho = 0.0, em_lr = 0.0, em_momentum = 0.5, em_scale = 1e-2,
         em_stop = 1e-7;
  std::size_t em_dim = 2, em_iters = 1000;
  std::uint64_t em_seed = 0;
  em->add_option("--input", em_input, "points CSV")->required();
  em->add_option("--config", em_config, "kernel config JSON")->required();
  em->add_option("--rho", em_rho, "perplexity ratio in (0,1)")->required();
  em->add_option("--dim", em_dim, "embedding dimension");
  em->add_option("--iters", em_iters, "iteration cap");
  em->add_option("--lr", em_lr, "learning rate (0 = auto: n)");
  em->add_option("--momentum", em_momentum, "momentum in [0,1)");
  em->add_option("--seed", em_seed, "initialization seed");
  em->add_option("--init-scale", em_scale, "initial coordinate scale");
  em->add_option("--stop-tol", em_stop, "gradient max row norm stop");
  em->add_option("--out", em_out, "output directory")->required();

  // continuum
  auto* co = app.add_subcommand(
      "continuum", "Solve the continuum calibration on a grid over the "
                   "measure's support");
  std::string co_measure, co_config, co_out;
  double co_rho = 0.0;
  std::size_t co_points = 33;
  co->add_option("--measure", co_measure, "measure spec JSON")->required();
  co->add_option("--config", co_config, "kernel config JSON")->required();
  co->add_option("--rho", co_rho, "perplexity ratio in (0,1)")->required();
  co->add_option("--points", co_points, "evaluation points per axis");
  co->add_option("--out", co_out, "output directory")->required();

  // study
  auto* st = app.add_subcommand(
      "study", "Run the convergence study described by a JSON config");
  std::string st_config;
  st->add_option("--config", st_config, "study config JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      std::cout << app.help();
      return 0;
    }
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  }

  if (vk->parsed()) {
    auto cfg = gtsne::kernel_config_from_file(vk_config);
    auto rep = gtsne::validate_kernel_config(cfg, vk_dim);
    std::cout << gtsne::validation_report_json(rep).dump(2) << "\n";
    return rep.overall ? 0 : 1;
  }

  if (cal->parsed()) {
    auto cfg = gtsne::kernel_config_from_file(cal_config);
    auto pts = gtsne::read_points_csv(cal_input);
    auto sig = gtsne::calibrate_all(cfg.input, pts, cal_rho);
    gtsne::atomic_write(cal_out, sigma_table_csv(sig));
    return 0;
  }

  if (em->parsed()) {
    auto cfg = gtsne::kernel_config_from_file(em_config);
    auto pts = gtsne::read_points_csv(em_input);
    gtsne::OptimizerConfig oc;
    oc.iterations = em_iters;
    oc.learning_rate = em_lr;
    oc.momentum = em_momentum;
    oc.seed = em_seed;
    oc.init_scale = em_scale;
    oc.stop_tol = em_stop;
    auto res = gtsne::run_tsne(pts, cfg, em_rho, em_dim, oc);

    std::filesystem::path dir = em_out;
    gtsne::atomic_write(dir / "embedding.csv",
                        gtsne::points_to_csv(res.embedding.y));
    gtsne::atomic_write(dir / "trace.csv", trace_csv(res.embedding));
    gtsne::atomic_write(dir / "sigmas.csv", sigma_table_csv(res.sigmas));

    nlohmann::json meta;
    meta["n"] = pts.rows();
    meta["input-dim"] = pts.cols();
    meta["embed-dim"] = em_dim;
    meta["rho"] = em_rho;
    meta["perplexity"] = em_rho * static_cast<double>(pts.rows());
    meta["seed"] = em_seed;
    meta["iterations"] = res.embedding.iterations_run;
    meta["converged"] = res.embedding.converged;
    meta["loss"] = res.embedding.loss;
    meta["grad-norm"] = res.embedding.grad_norm;
    meta["learning-rate"] = gtsne::resolve_learning_rate(oc, pts.rows());
    meta["momentum"] = em_momentum;
    meta["init-scale"] = em_scale;
    meta["stop-tol"] = em_stop;
    meta["input-kernel"] = cfg.input.id;
    meta["output-kernel"] = cfg.output.id;
    meta["gradient-factor"] = gtsne::kGradientFactor;
    gtsne::atomic_write(dir / "meta.json", meta.dump(2) + "\n");
    return 0;
  }

  if (co->parsed()) {
    auto cfg = gtsne::kernel_config_from_file(co_config);
    auto spec = gtsne::parse_measure_spec(gtsne::load_json(co_measure));
    auto mu = gtsne::to_measure(spec);
    if (co_points < 2) throw gtsne::Error(gtsne::errc::config,
                                          "need at least 2 points per axis");
    std::vector<std::vector<double>> grid;
    std::vector<double> pt(mu.dim);
    std::vector<std::size_t> idx(mu.dim, 0);
    while (true) {
      for (std::size_t k = 0; k < mu.dim; ++k)
        pt[k] = mu.box_lo[k] + (mu.box_hi[k] - mu.box_lo[k]) *
                                   static_cast<double>(idx[k]) /
                                   static_cast<double>(co_points - 1);
      grid.push_back(pt);
      std::size_t k = 0;
      while (k < mu.dim && ++idx[k] == co_points) idx[k++] = 0;
      if (k == mu.dim) break;
    }
    std::string csv;
    for (std::size_t k = 0; k < mu.dim; ++k)
      csv += "x" + std::to_string(k) + ",";
    csv += "sigma-star,f-residual\n";
    for (const auto& g : grid) {
      auto star = gtsne::sigma_star(mu, cfg.input, co_rho, g.data());
      for (double v : g) csv += gtsne::format_double(v) + ",";
      csv += gtsne::format_double(star.sigma) + "," +
             gtsne::format_double(star.residual) + "\n";
    }
    std::filesystem::path dir = co_out;
    gtsne::atomic_write(dir / "sigma_star.csv", csv);
    return 0;
  }

  if (st->parsed()) {
    auto cfg = gtsne::parse_study_config(gtsne::load_json(st_config));
    auto rows = gtsne::convergence_study(cfg);
    for (const auto& r : rows)
      std::cerr << "cell n=" << r.n << " seed=" << r.seed
                << (r.error.empty() ? " ok" : " error=" + r.error) << "\n";
    return 0;
  }

  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const gtsne::CalibrationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    for (const auto& f : e.failures())
      std::cerr << "  point " << f.index << ": " << f.message << "\n";
    return exit_code_for(e);
  } catch (const gtsne::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
