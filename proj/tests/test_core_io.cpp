#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>

#include "gtsne/core.hpp"
#include "gtsne/io.hpp"
#include "gtsne/quadrature.hpp"

#include "support/helpers.hpp"

using namespace gtsne;

TEST_CASE("matrix storage and row access", "[core]") {
  Matrix m(2, 3, {1, 2, 3, 4, 5, 6});
  REQUIRE(m.rows() == 2);
  REQUIRE(m.cols() == 3);
  REQUIRE(m(0, 0) == 1.0);
  REQUIRE(m(1, 2) == 6.0);
  REQUIRE(m.row(1)[0] == 4.0);
  REQUIRE(m.all_finite());
  m(0, 1) = std::nan("");
  REQUIRE_FALSE(m.all_finite());
}

TEST_CASE("distance and diameter", "[core]") {
  Matrix y(3, 2, {0, 0, 3, 4, 0, 1});
  REQUIRE(distance(y.row(0), y.row(1), 2) == Catch::Approx(5.0));
  REQUIRE(diameter(y) == Catch::Approx(5.0));
}

TEST_CASE("points csv round trip preserves every bit", "[io]") {
  testutil::TempDir tmp;
  auto x = testutil::random_points(17, 3, 99);
  x(0, 0) = 1.0 / 3.0;
  x(1, 1) = -1e-17;
  auto path = tmp.path() / "pts.csv";
  atomic_write(path, points_to_csv(x));
  Matrix back = read_points_csv(path);
  REQUIRE(back.rows() == x.rows());
  REQUIRE(back.cols() == x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j)
      REQUIRE(back(i, j) == x(i, j));
}

TEST_CASE("csv reader rejects malformed data", "[io]") {
  testutil::TempDir tmp;
  auto path = tmp.path() / "bad.csv";

  atomic_write(path, "1.0,2.0\n3.0\n");
  REQUIRE_THROWS_AS(read_points_csv(path), Error);

  atomic_write(path, "1.0,abc\n");
  REQUIRE_THROWS_AS(read_points_csv(path), Error);

  atomic_write(path, "1.0,inf\n");
  REQUIRE_THROWS_AS(read_points_csv(path), Error);

  atomic_write(path, "");
  REQUIRE_THROWS_AS(read_points_csv(path), Error);
}

TEST_CASE("csv reader tolerates blank lines and crlf", "[io]") {
  testutil::TempDir tmp;
  auto path = tmp.path() / "pts.csv";
  atomic_write(path, "1.0,2.0\r\n\n3.5,-4.25\n");
  Matrix m = read_points_csv(path);
  REQUIRE(m.rows() == 2);
  REQUIRE(m(1, 1) == -4.25);
}

TEST_CASE("atomic write leaves no temp file and replaces content", "[io]") {
  testutil::TempDir tmp;
  auto path = tmp.path() / "f.txt";
  atomic_write(path, "one");
  atomic_write(path, "two");
  REQUIRE(read_file(path) == "two");
  REQUIRE_FALSE(std::filesystem::exists(path.string() + ".tmp"));
}

TEST_CASE("missing file raises an io error", "[io]") {
  REQUIRE_THROWS_MATCHES(
      read_points_csv("/nonexistent/nowhere.csv"), Error,
      Catch::Matchers::Predicate<Error>(
          [](const Error& e) { return e.code() == errc::io; }));
}

TEST_CASE("adaptive trapezoid integrates smooth functions", "[core]") {
  auto r = adaptive_trapezoid([](double t) { return t * t; }, 0.0, 1.0);
  REQUIRE(r.converged);
  REQUIRE(r.value == Catch::Approx(1.0 / 3.0).epsilon(1e-10));

  auto s = adaptive_trapezoid([](double t) { return std::sin(t); }, 0.0,
                              3.141592653589793);
  REQUIRE(s.converged);
  REQUIRE(s.value == Catch::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("improper integral converges on decaying tails", "[core]") {
  auto r = improper_integral([](double t) { return std::exp(-t); }, 1e-10);
  REQUIRE(r.converged);
  REQUIRE(r.value == Catch::Approx(1.0).epsilon(1e-8));

  auto g = improper_integral([](double t) { return std::exp(-t * t); }, 1e-10);
  REQUIRE(g.converged);
  REQUIRE(g.value == Catch::Approx(std::sqrt(3.141592653589793) / 2).epsilon(1e-8));
}

TEST_CASE("improper integral flags divergence", "[core]") {
  auto flat = improper_integral([](double) { return 1.0; }, 1e-8);
  REQUIRE_FALSE(flat.converged);

  auto slow = improper_integral(
      [](double t) { return std::log1p(t) / (1.0 + t); }, 1e-8);
  REQUIRE_FALSE(slow.converged);
}
