#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "gtsne/continuum.hpp"
#include "gtsne/descent.hpp"
#include "gtsne/quadrature.hpp"

#include "support/helpers.hpp"

using namespace gtsne;
using testutil::random_points;

namespace {

//! Continuum calibration functional on uniform [0,1] via adaptive
//! quadrature on the density itself; independent of the measure's node set.
double big_F_oracle(const InputKernel& kin, double rho, double x,
                    double sigma) {
  auto z_int = adaptive_trapezoid(
      [&](double u) {
        double t = std::pow(std::abs(x - u), kin.theta);
        return std::exp(-kin.w(sigma * t));
      },
      0.0, 1.0, 1e-13);
  auto m_int = adaptive_trapezoid(
      [&](double u) {
        double t = std::pow(std::abs(x - u), kin.theta);
        double w = kin.w(sigma * t);
        return w * std::exp(-w);
      },
      0.0, 1.0, 1e-13);
  return -m_int.value / z_int.value - std::log(z_int.value) + std::log(rho);
}

}  // namespace

TEST_CASE("measure constructors integrate to unit mass", "[continuum]") {
  ContinuumMeasure u1 = uniform_box({0.0}, {1.0});
  REQUIRE(u1.dim == 1);
  REQUIRE(u1.size() == config::kNodes1D);
  REQUIRE(u1.total_mass() == Catch::Approx(1.0).epsilon(1e-12));

  ContinuumMeasure u2 = uniform_box({0.0, -1.0}, {2.0, 1.0});
  REQUIRE(u2.dim == 2);
  REQUIRE(u2.size() == config::kNodes2D * config::kNodes2D);
  REQUIRE(u2.total_mass() == Catch::Approx(1.0).epsilon(1e-11));

  ContinuumMeasure g1 = trunc_gauss({0.3}, {0.2}, {0.0}, {1.0});
  REQUIRE(g1.total_mass() == Catch::Approx(1.0).margin(1e-5));

  ContinuumMeasure g2 = trunc_gauss({0.0, 0.0}, {0.5, 0.8}, {-1.0, -1.0},
                                    {1.0, 1.0});
  REQUIRE(g2.total_mass() == Catch::Approx(1.0).margin(1e-3));
}

TEST_CASE("measure construction rejects bad configurations", "[continuum]") {
  REQUIRE_THROWS_AS(uniform_box({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}), Error);
  REQUIRE_THROWS_AS(uniform_box({1.0}, {0.0}), Error);
  REQUIRE_THROWS_AS(trunc_gauss({0.0}, {-1.0}, {0.0}, {1.0}), Error);
  // A box ten sigmas away from the mean carries no mass.
  REQUIRE_THROWS_AS(trunc_gauss({0.0}, {0.01}, {5.0}, {6.0}), Error);
}

TEST_CASE("mixtures combine aligned component grids", "[continuum]") {
  ContinuumMeasure a = uniform_box({0.0}, {0.5});
  ContinuumMeasure b = uniform_box({0.5}, {1.0});
  ContinuumMeasure mix = mixture({a, b}, {0.3, 0.7});
  REQUIRE(mix.total_mass() == Catch::Approx(1.0).epsilon(1e-12));
  REQUIRE(mix.size() == a.size() + b.size());
  REQUIRE(mix.box_lo[0] == 0.0);
  REQUIRE(mix.box_hi[0] == 1.0);
  double probe = 0.8;
  REQUIRE(mix.contains(&probe));

  // Zero-weight components are dropped entirely.
  ContinuumMeasure solo = mixture({a, b}, {1.0, 0.0});
  REQUIRE(solo.size() == a.size());

  REQUIRE_THROWS_AS(mixture({a, b}, {0.5, 0.6}), Error);
  REQUIRE_THROWS_AS(mixture({a, b}, {1.5, -0.5}), Error);
  ContinuumMeasure two_d = uniform_box({0.0, 0.0}, {1.0, 1.0});
  REQUIRE_THROWS_AS(mixture({a, two_d}, {0.5, 0.5}), Error);
}

TEST_CASE("calibration functional tends to log rho at small sigma",
          "[continuum]") {
  ContinuumMeasure mu = uniform_box({0.0}, {1.0});
  InputKernel kin = gaussian_input();
  double x = 0.5;
  for (double rho : {0.15, 0.3, 0.6}) {
    double f = big_F(mu, kin, rho, &x, 1e-12);
    REQUIRE(f == Catch::Approx(std::log(rho)).margin(1e-6));
  }
}

TEST_CASE("calibration functional is strictly increasing in sigma",
          "[continuum]") {
  ContinuumMeasure mu = uniform_box({0.0}, {1.0});
  InputKernel kin = gaussian_input();
  for (double x : {0.1, 0.5, 0.85}) {
    double prev = -std::numeric_limits<double>::infinity();
    for (double sigma : {1.0, 5.0, 25.0}) {
      double f = big_F(mu, kin, 0.3, &x, sigma);
      REQUIRE(f > prev);
      prev = f;
    }
  }
}

TEST_CASE("calibration functional matches adaptive quadrature", "[continuum]") {
  ContinuumMeasure mu = uniform_box({0.0}, {1.0});
  ContinuumMeasure fine = uniform_box({0.0}, {1.0}, 4 * config::kNodes1D);
  InputKernel kin = gaussian_input();
  for (double x : {0.25, 0.6}) {
    for (double sigma : {1.0, 10.0, 25.0}) {
      double want = big_F_oracle(kin, 0.3, x, sigma);
      REQUIRE(big_F(mu, kin, 0.3, &x, sigma) ==
              Catch::Approx(want).margin(1e-5));
      REQUIRE(big_F(fine, kin, 0.3, &x, sigma) ==
              Catch::Approx(want).margin(1e-6));
    }
  }
}

TEST_CASE("calibration functional grows logarithmically at large sigma",
          "[continuum]") {
  // Gaussian-form input on an interior point: F(sigma) ~ (1/2) log sigma,
  // the d/theta slope for d = 1, theta = 2.
  ContinuumMeasure mu = uniform_box({0.0}, {1.0});
  InputKernel kin = gaussian_input();
  double x = 0.5;
  double df = big_F(mu, kin, 0.3, &x, 1e5) - big_F(mu, kin, 0.3, &x, 1e3);
  REQUIRE(df == Catch::Approx(0.5 * std::log(100.0)).epsilon(0.02));
}

TEST_CASE("points outside the support box are rejected", "[continuum]") {
  ContinuumMeasure mu = uniform_box({0.0}, {1.0});
  double outside = 1.2;
  REQUIRE_THROWS_MATCHES(
      big_F(mu, gaussian_input(), 0.3, &outside, 1.0), Error,
      Catch::Matchers::Predicate<Error>(
          [](const Error& e) { return e.code() == errc::invalid_input; }));
}

TEST_CASE("continuum scale field is symmetric and rho-monotone", "[continuum]") {
  ContinuumMeasure mu = uniform_box({0.0}, {1.0});
  InputKernel kin = gaussian_input();
  double left = 0.25, right = 0.75;
  SigmaResult sl = sigma_star(mu, kin, 0.3, &left);
  SigmaResult sr = sigma_star(mu, kin, 0.3, &right);
  REQUIRE(std::abs(sl.residual) <= config::kFTol);
  REQUIRE(std::abs(sr.residual) <= config::kFTol);
  // Mirror-image points see the same geometry.
  REQUIRE(sl.sigma == Catch::Approx(sr.sigma).epsilon(1e-9));

  // Root sanity: F changes sign across sigma_star.
  REQUIRE(big_F(mu, kin, 0.3, &left, sl.sigma * 1.1) > 0.0);
  REQUIRE(big_F(mu, kin, 0.3, &left, sl.sigma / 1.1) < 0.0);

  // A larger neighborhood scale needs a wider kernel: sigma falls in rho.
  SigmaResult tight = sigma_star(mu, kin, 0.45, &left);
  REQUIRE(tight.sigma < sl.sigma);

  // Boundary points see half the neighborhood, so they calibrate wider.
  double edge = 0.0;
  SigmaResult se = sigma_star(mu, kin, 0.3, &edge);
  REQUIRE(se.sigma < sl.sigma);
}

TEST_CASE("symmetrized conditional density has the advertised shape",
          "[continuum]") {
  ContinuumMeasure mu = uniform_box({0.0}, {1.0});
  InputKernel kin = gaussian_input();
  auto psi = [](const double* x) { return 2.0 + *x; };
  double a = 0.3, b = 0.7;
  double pab = p_psi(mu, kin, psi, &a, &b);
  double pba = p_psi(mu, kin, psi, &b, &a);
  REQUIRE(pab == Catch::Approx(pba).epsilon(1e-14));
  REQUIRE(pab > 0.0);

  // Direct arithmetic from the published normalizers.
  double za = continuum_Z(mu, kin, &a, psi(&a));
  double zb = continuum_Z(mu, kin, &b, psi(&b));
  double r2 = (a - b) * (a - b);
  double want = 0.5 * (std::exp(-psi(&a) * r2) / za +
                       std::exp(-psi(&b) * r2) / zb);
  REQUIRE(pab == Catch::Approx(want).epsilon(1e-13));

  // Diagonal value is the reciprocal normalizer.
  REQUIRE(p_psi(mu, kin, psi, &a, &a) == Catch::Approx(1.0 / za).epsilon(1e-13));

  auto bad_psi = [](const double*) { return 0.0; };
  REQUIRE_THROWS_AS(p_psi(mu, kin, bad_psi, &a, &b), Error);
}

TEST_CASE("two-point output density is pinned at two", "[continuum]") {
  // With n = 2 the diagonal-corrected normalizer is g_ab / 2, so the
  // off-diagonal density is exactly 2 wherever the pair is embedded.
  for (double spread : {0.1, 1.0, 7.5}) {
    JointSample sample;
    sample.x = Matrix(2, 1, {0.0, 1.0});
    sample.y = Matrix(2, 1, {0.0, spread});
    double q = q_continuous(sample, cauchy_output(),
                            sample.y.row(0), sample.y.row(1));
    REQUIRE(q == Catch::Approx(2.0).epsilon(1e-14));
  }
  // Coincident pair: g_ab = k(0), and the query kernel value cancels it.
  JointSample tied;
  tied.x = Matrix(2, 1, {0.0, 1.0});
  tied.y = Matrix(2, 1, {0.4, 0.4});
  REQUIRE(q_continuous(tied, gauss_output(), tied.y.row(0), tied.y.row(1)) ==
          Catch::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("output density matches a direct normalizer and is translation "
          "invariant", "[continuum]") {
  JointSample sample;
  sample.x = Matrix(3, 1, {0.0, 1.0, 2.0});
  sample.y = Matrix(3, 2, {0.0, 0.0, 1.5, -0.5, -2.0, 1.0});
  OutputKernel kout = cauchy_output();

  double off = 0.0;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      if (i == j) continue;
      off += kout.k(distance(sample.y.row(i), sample.y.row(j), 2));
    }
  double denom = off / 9.0;
  double probe[2] = {0.7, 0.7};
  double want = kout.k(distance(probe, sample.y.row(1), 2)) / denom;
  REQUIRE(q_continuous(sample, kout, probe, sample.y.row(1)) ==
          Catch::Approx(want).epsilon(1e-13));

  JointSample moved = sample;
  for (std::size_t i = 0; i < 3; ++i) {
    moved.y(i, 0) += 11.0;
    moved.y(i, 1) -= 4.0;
  }
  double probe2[2] = {probe[0] + 11.0, probe[1] - 4.0};
  REQUIRE(q_continuous(moved, kout, probe2, moved.y.row(1)) ==
          Catch::Approx(want).epsilon(1e-12));
}

TEST_CASE("density matrices agree with their pointwise definitions",
          "[continuum]") {
  Matrix x = random_points(8, 2, 91);
  Matrix y = random_points(8, 2, 92);
  InputKernel kin = gaussian_input();
  OutputKernel kout = cauchy_output();
  auto cal = calibrate_all(kin, x, 0.4);
  std::vector<double> sig;
  for (const auto& r : cal) sig.push_back(r.sigma);

  Matrix p = p_psi_matrix(kin, x, sig);
  // Normalizers keep the unit self term: z_i = (1 + sum_{k != i} f_ik) / n.
  for (std::size_t i = 0; i < 8; ++i) {
    double z = 1.0;
    for (std::size_t k = 0; k < 8; ++k) {
      if (k == i) continue;
      z += std::exp(-sig[i] * squared_distance(x.row(i), x.row(k), 2));
    }
    z /= 8.0;
    REQUIRE(p(i, i) == Catch::Approx(1.0 / z).epsilon(1e-12));
    for (std::size_t j = 0; j < 8; ++j) {
      REQUIRE(p(i, j) == p(j, i));
      REQUIRE(p(i, j) > 0.0);
    }
  }

  JointSample sample{x, y};
  Matrix q = q_matrix(kout, y);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j)
      REQUIRE(q(i, j) == Catch::Approx(q_continuous(sample, kout, y.row(i),
                                                    y.row(j))).epsilon(1e-12));
}

TEST_CASE("plug-in functional matches a hand-rolled sum", "[continuum]") {
  Matrix x = random_points(9, 1, 93);
  Matrix y = random_points(9, 2, 94);
  InputKernel kin = gaussian_input();
  OutputKernel kout = cauchy_output();
  double rho = 0.35;

  auto cal = calibrate_all(kin, x, rho);
  std::vector<double> sig;
  for (const auto& r : cal) sig.push_back(r.sigma);
  Matrix p = p_psi_matrix(kin, x, sig);
  Matrix q = q_matrix(kout, y);
  double want = 0.0;
  for (std::size_t i = 0; i < 9; ++i)
    for (std::size_t j = 0; j < 9; ++j) {
      if (i == j) continue;
      want += p(i, j) * std::log(p(i, j) / q(i, j));
    }
  want /= 81.0;

  JointSample sample{x, y};
  REQUIRE(functional_I(sample, kin, kout, rho) ==
          Catch::Approx(want).epsilon(1e-12));
}

TEST_CASE("entropy expansion residual matches its definition and shrinks "
          "with n", "[continuum]") {
  InputKernel kin = gaussian_input();
  auto residual_at = [&](std::size_t n, std::uint64_t seed) {
    Matrix x = random_points(n, 1, seed);
    auto cal = calibrate_all(kin, x, 0.3);
    std::vector<double> sig;
    for (const auto& r : cal) sig.push_back(r.sigma);
    Matrix P = joint_affinities(kin, x, cal);
    Matrix p = p_psi_matrix(kin, x, sig);
    return entropy_expansion_residual(P, p);
  };

  // Definition check at n = 6 against straight loops.
  {
    Matrix x = random_points(6, 1, 95);
    auto cal = calibrate_all(kin, x, 0.5);
    std::vector<double> sig;
    for (const auto& r : cal) sig.push_back(r.sigma);
    Matrix P = joint_affinities(kin, x, cal);
    Matrix p = p_psi_matrix(kin, x, sig);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t j = 0; j < 6; ++j) {
        if (i != j && P(i, j) > 0.0) lhs += P(i, j) * std::log(P(i, j));
        if (p(i, j) > 0.0) rhs += p(i, j) * std::log(p(i, j));
      }
    double want = std::abs(lhs + 2.0 * std::log(6.0) - rhs / 36.0);
    REQUIRE(entropy_expansion_residual(P, p) ==
            Catch::Approx(want).epsilon(1e-12));
  }

  REQUIRE(residual_at(160, 96) < residual_at(40, 96));
}

TEST_CASE("joint stationarity residuals vanish only at equilibria",
          "[continuum]") {
  Matrix x = random_points(20, 2, 41);
  KernelConfig kc{gaussian_input(), cauchy_output()};
  OptimizerConfig cfg;
  cfg.iterations = 12000;
  cfg.stop_tol = 1e-8;
  TsneResult res = run_tsne(x, kc, 0.4, 2, cfg);
  REQUIRE(res.embedding.converged);

  JointSample sample{x, res.embedding.y};
  auto r = stationarity_residual(sample, kc.input, kc.output, 0.4);
  double rmax = 0.0;
  for (double v : r) rmax = std::max(rmax, v);
  REQUIRE(rmax <= 20.0 / kGradientFactor * cfg.stop_tol);

  JointSample bumped = sample;
  bumped.y(0, 0) += 0.5;
  auto rb = stationarity_residual(bumped, kc.input, kc.output, 0.4);
  double rbmax = 0.0;
  for (double v : rb) rbmax = std::max(rbmax, v);
  REQUIRE(rbmax > 100.0 * rmax);
}

TEST_CASE("ordering gap is zero on degenerate triples", "[continuum]") {
  std::vector<double> w = {0.2, 0.5, 0.3, 0.1};
  std::vector<double> f = {1.0, 2.0, 3.0, 4.0};
  std::vector<double> g = {0.5, 1.5, 2.5, 3.5};
  // f = h makes the ratio constant.
  REQUIRE(chebyshev_gap(f, g, f, w) == Catch::Approx(0.0).margin(1e-15));
  // Constant g collapses both products.
  std::vector<double> gc(4, 2.0);
  std::vector<double> h = {1.0, 1.0, 2.0, 2.0};
  REQUIRE(chebyshev_gap(f, gc, h, w) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("ordering gap is nonnegative and matches the double-sum identity",
          "[continuum]") {
  std::mt19937_64 rng(7);
  auto u01 = [&]() { return (rng() >> 11) * 0x1.0p-53; };
  for (int rep = 0; rep < 50; ++rep) {
    std::size_t n = 3 + rep % 6;
    std::vector<double> w(n), h(n), g(n), f(n), ratio(n);
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = u01();
      h[i] = 0.1 + u01();
      g[i] = static_cast<double>(i) + u01();       // increasing
      ratio[i] = 2.0 - static_cast<double>(i) * 0.2 - 0.1 * u01();
    }
    for (std::size_t i = 0; i < n; ++i) f[i] = ratio[i] * h[i];

    double gap = chebyshev_gap(f, g, h, w);
    REQUIRE(gap >= -1e-12);

    double twice = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        twice += w[i] * w[j] * h[i] * h[j] * (g[i] - g[j]) *
                 (f[j] / h[j] - f[i] / h[i]);
    REQUIRE(gap == Catch::Approx(0.5 * twice).epsilon(1e-10).margin(1e-14));
  }
}

TEST_CASE("incompatible orderings are rejected", "[continuum]") {
  std::vector<double> w = {0.5, 0.5};
  std::vector<double> h = {1.0, 1.0};
  std::vector<double> f = {1.0, 2.0};
  std::vector<double> g = {0.0, 1.0};
  REQUIRE_THROWS_MATCHES(
      chebyshev_gap(f, g, h, w), Error,
      Catch::Matchers::Predicate<Error>([](const Error& e) {
        return e.code() == errc::incompatible_triple;
      }));
}

TEST_CASE("input normalizing constants match closed forms", "[continuum]") {
  REQUIRE(normalization_Zd(gaussian_input(), 1) ==
          Catch::Approx(std::sqrt(M_PI)).epsilon(1e-8));
  REQUIRE(normalization_Zd(gaussian_input(), 2) ==
          Catch::Approx(M_PI).epsilon(1e-8));
  REQUIRE(normalization_Zd(power_input(1.0, 1.0), 1) ==
          Catch::Approx(2.0).epsilon(1e-8));
  REQUIRE_THROWS_MATCHES(
      normalization_Zd(arctan_input(1.0), 1), Error,
      Catch::Matchers::Predicate<Error>(
          [](const Error& e) { return e.code() == errc::kernel_invalid; }));
}
