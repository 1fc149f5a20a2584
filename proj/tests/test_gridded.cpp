#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "sniftle/gridded.hpp"
#include "test_helpers.hpp"

using namespace sniftle;

namespace {

GriddedField sample_field(const SystemModel& m, const Vec& xs, const Vec& ys,
                          const Vec& ts) {
  GriddedField g;
  g.axes = {xs, ys};
  g.times = ts;
  for (double t : ts)
    for (double x : xs)
      for (double y : ys) {
        const Vec u = m.u({x, y}, t);
        g.velocity.push_back(u[0]);
        g.velocity.push_back(u[1]);
      }
  return g;
}

Vec linspace(double a, double b, std::size_t n) {
  Vec v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = a + (b - a) * double(i) / double(n - 1);
  return v;
}

}  // namespace

TEST_CASE("constant samples interpolate to the constant, zero gradient") {
  GriddedField g;
  g.axes = {Vec{0, 1, 2}, Vec{0, 1}};
  g.times = {0.0, 1.0};
  for (std::size_t k = 0; k < 2 * 6; ++k) {
    g.velocity.push_back(3.5);
    g.velocity.push_back(-1.25);
  }
  const auto m = model_from_grid(g);
  const Vec u = m.u({0.7, 0.4}, 0.3);
  CHECK(u[0] == 3.5);
  CHECK(u[1] == -1.25);
  CHECK(max_abs(m.grad_u({0.7, 0.4}, 0.3)) < 1e-12);
}

TEST_CASE("multilinear interpolation is exact on linear fields") {
  const Mat b(2, {0.3, -0.8, 1.1, 0.4});
  SystemModel lin;
  lin.n = 2;
  lin.velocity = [b](const Vec& x, double) { return b * x; };
  lin.velocity_gradient = [b](const Vec&, double) { return b; };
  lin.diffusion = [](const Vec&, double) { return Mat::identity(2); };

  const auto g = sample_field(lin, linspace(-1, 1, 5), linspace(-1, 1, 4), {0.0, 2.0});
  const auto m = model_from_grid(g);
  SubstreamRng rng(301, 0);
  for (int i = 0; i < 50; ++i) {
    const Vec x{testing::uniform(rng, -0.99, 0.99), testing::uniform(rng, -0.99, 0.99)};
    const double t = testing::uniform(rng, 0.0, 2.0);
    CHECK(norm(m.u(x, t) - b * x) < 1e-13);
    CHECK(max_abs(m.grad_u(x, t) - b) < 1e-12);
  }
}

TEST_CASE("gridded double gyre tracks the analytic field") {
  const auto dg = make_double_gyre();
  const auto g = sample_field(dg, linspace(0, 2, 256), linspace(0, 1, 128),
                              linspace(0, 10, 50));
  const auto m = model_from_grid(g);
  SubstreamRng rng(302, 0);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const Vec x{testing::uniform(rng, 0.01, 1.99), testing::uniform(rng, 0.01, 0.99)};
    const double t = testing::uniform(rng, 0.0, 10.0);
    worst = std::max(worst, norm(m.u(x, t) - dg.u(x, t)));
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("interpolant is continuous across grid planes") {
  const auto dg = make_double_gyre();
  const auto g = sample_field(dg, linspace(0, 2, 21), linspace(0, 1, 11), {0.0, 1.0});
  const auto m = model_from_grid(g);
  // grid plane at x = 0.1 (cell boundary of the 21-point axis)
  const Vec left = m.u({0.1 - 1e-12, 0.43}, 0.5);
  const Vec right = m.u({0.1 + 1e-12, 0.43}, 0.5);
  CHECK(norm(left - right) <= 1e-9 * std::max(1.0, norm(left)));
}

TEST_CASE("out-of-domain policy") {
  const auto dg = make_double_gyre();
  const auto g = sample_field(dg, linspace(0, 2, 11), linspace(0, 1, 6), {0.0, 1.0});

  const auto strict = model_from_grid(g, OutOfDomain::kError);
  CHECK_THROWS_AS(strict.u({2.5, 0.5}, 0.5), DomainError);
  CHECK_THROWS_AS(strict.u({1.0, 0.5}, 3.0), DomainError);

  const auto clamped = model_from_grid(g, OutOfDomain::kClamp);
  CHECK(norm(clamped.u({2.5, 0.5}, 0.5) - clamped.u({2.0, 0.5}, 0.5)) == 0.0);
}

TEST_CASE("text loader round-trips a small grid") {
  const std::string path = "gridded_test_input.txt";
  {
    std::ofstream out(path);
    out << "t x1 x2 u1 u2\n";
    for (double t : {0.0, 1.0})
      for (double x : {0.0, 0.5, 1.0})
        for (double y : {0.0, 1.0})
          out << t << " " << x << " " << y << " " << (x + t) << " " << (y - t) << "\n";
  }
  const auto g = load_gridded_text(path);
  CHECK(g.dim() == 2);
  CHECK(g.times == Vec{0.0, 1.0});
  CHECK(g.axes[0] == Vec{0.0, 0.5, 1.0});
  const auto m = model_from_grid(g);
  const Vec u = m.u({0.25, 0.5}, 0.0);
  CHECK(u[0] == Catch::Approx(0.25).margin(1e-14));
  CHECK(u[1] == Catch::Approx(0.5).margin(1e-14));
  std::remove(path.c_str());
}

TEST_CASE("text loader rejects malformed input") {
  const std::string path = "gridded_bad_input.txt";
  {
    std::ofstream out(path);
    out << "t x1 x2 u1 u2\n0 0 0 1 1\n0 1 0 1 1\n";  // incomplete tensor grid
  }
  CHECK_THROWS_AS(load_gridded_text(path), ConfigError);
  {
    std::ofstream out(path);
    out << "x1 t u1\n";
  }
  CHECK_THROWS_AS(load_gridded_text(path), ConfigError);
  std::remove(path.c_str());
}

TEST_CASE("grid validation") {
  GriddedField g;
  g.axes = {Vec{0, 1}, Vec{1, 0}};  // not increasing
  g.times = {0.0};
  g.velocity.assign(8, 0.0);
  CHECK_THROWS_AS(g.validate(), InvalidInputError);
}
