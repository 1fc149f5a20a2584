#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "sniftle/flowmap.hpp"
#include "sniftle/gridded.hpp"
#include "test_helpers.hpp"

using namespace sniftle;
using sniftle::testing::rel_err;

namespace {

// closed forms for the linear saddle, hand-integrated:
//   J(t)  = diag(e^{at}, e^{-at})
//   K(t)  = diag((1 - e^{-2at})/(2a), (e^{2at} - 1)/(2a))
Mat saddle_jacobian(double a, double t) {
  return Mat(2, {std::exp(a * t), 0, 0, std::exp(-a * t)});
}
Mat saddle_quad(double a, double t) {
  return Mat(2, {(1 - std::exp(-2 * a * t)) / (2 * a), 0, 0,
                 (std::exp(2 * a * t) - 1) / (2 * a)});
}

}  // namespace

TEST_CASE("zero model: identity flow, K = t I") {
  const auto m = make_zero_model(2);
  const Vec xi0{0.4, -1.2};
  const auto sol = solve_flow(m, xi0, 2.5);
  CHECK(norm(sol.position - xi0) == 0.0);
  CHECK(max_abs(sol.jacobian - Mat::identity(2)) == 0.0);
  CHECK(max_abs(sol.quad - 2.5 * Mat::identity(2)) < 1e-12);
  CHECK(sol.consistency_defect < 1e-12);
}

TEST_CASE("linear saddle matches the hand-integrated closed form") {
  const auto m = make_linear_saddle(1.0);
  const auto sol = solve_flow(m, {1.0, 1.0}, 1.0);
  const Mat j_exact = saddle_jacobian(1.0, 1.0);
  const Mat k_exact = saddle_quad(1.0, 1.0);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(rel_err(sol.jacobian(i, i), j_exact(i, i)) < 1e-8);
    CHECK(rel_err(sol.quad(i, i), k_exact(i, i)) < 1e-8);
  }
  CHECK(rel_err(sol.position[0], std::numbers::e) < 1e-8);
  CHECK(rel_err(sol.position[1], 1.0 / std::numbers::e) < 1e-8);
}

TEST_CASE("rigid rotation: orthogonal Jacobian, K = t I") {
  const double w = 1.3, t = 2.0;
  const auto m = make_rigid_rotation(w);
  const auto sol = solve_flow(m, {1.0, 0.0}, t);
  const double c = std::cos(w * t), s = std::sin(w * t);
  CHECK(max_abs(sol.jacobian - Mat(2, {c, -s, s, c})) < 1e-8);
  CHECK(max_abs(sol.quad - t * Mat::identity(2)) < 1e-8);
}

TEST_CASE("flow_map_only agrees with solve_flow") {
  const auto m = make_double_gyre();
  const Vec xi0{0.8, 0.3};
  const auto full = solve_flow(m, xi0, 2.0);
  const auto lite = flow_map_only(m, xi0, 2.0);
  CHECK(norm(full.position - lite.position) == 0.0);
  CHECK(max_abs(full.jacobian - lite.jacobian) == 0.0);

  const auto lite_saddle = flow_map_only(make_linear_saddle(1.0), {1.0, 1.0}, 1.0);
  CHECK(rel_err(lite_saddle.jacobian(0, 0), std::numbers::e) < 1e-8);

  const auto lite_zero = flow_map_only(make_zero_model(2), {0.1, 0.2}, 1.0);
  CHECK(norm(lite_zero.position - Vec{0.1, 0.2}) == 0.0);
  CHECK(max_abs(lite_zero.jacobian - Mat::identity(2)) == 0.0);
}

TEST_CASE("semigroup property on the autonomous saddle") {
  const auto m = make_linear_saddle(0.7);
  const Vec xi0{0.5, 2.0};
  const auto direct = solve_flow(m, xi0, 1.5);
  const auto staged = solve_flow_captures(m, xi0, {0.9, 1.5}, IntegratorConfig{});
  CHECK(norm(staged[1].position - direct.position) < 1e-8);
  CHECK(max_abs(staged[1].jacobian - direct.jacobian) <
        1e-6 * operator_norm(direct.jacobian));
}

TEST_CASE("J J^{-1} defect stays small in both inverse modes") {
  for (auto mode : {JacobianInverseMode::kAdjointOde, JacobianInverseMode::kDirectInvert}) {
    IntegratorConfig cfg;
    cfg.jacobian_inverse_mode = mode;
    const auto sol = solve_flow(make_double_gyre(), {1.2, 0.6}, 5.0, cfg);
    CHECK(sol.consistency_defect <= 1e-6);
  }
}

TEST_CASE("quadrature is PSD and nondecreasing") {
  const auto m = make_double_gyre();
  const auto sols = solve_flow_captures(m, {0.6, 0.4}, {1.0, 2.0, 3.0}, IntegratorConfig{});
  for (const auto& sol : sols) {
    const SymEig e = sym_eig(sol.quad);
    for (double lam : e.values) CHECK(lam >= 0.0);
  }
  for (std::size_t i = 1; i < sols.size(); ++i) {
    const SymEig d = sym_eig(sols[i].quad - sols[i - 1].quad);
    for (double lam : d.values) CHECK(lam >= -1e-9);
  }
}

TEST_CASE("RK4 position error is 4th order") {
  const auto m = make_linear_saddle(1.0);
  const Vec xi0{1.0, 1.0};
  const Vec exact{std::numbers::e, 1.0 / std::numbers::e};
  auto err = [&](double h) {
    IntegratorConfig cfg;
    cfg.step_size = h;
    return norm(solve_flow(m, xi0, 1.0, cfg).position - exact);
  };
  const double e1 = err(4e-3), e2 = err(2e-3), e3 = err(1e-3);
  CHECK(e1 / e2 == Catch::Approx(16.0).margin(4.0));
  CHECK(e2 / e3 == Catch::Approx(16.0).margin(4.0));
}

TEST_CASE("volume preservation: det J = 1 for divergence-free fields") {
  for (const auto& m :
       {make_linear_saddle(1.0), make_rigid_rotation(0.9), make_double_gyre()}) {
    const Vec xi0 = m.name == "double_gyre" ? Vec{1.1, 0.55} : Vec{0.7, 0.4};
    const auto sol = solve_flow(m, xi0, 3.0);
    CHECK(std::abs(determinant(sol.jacobian) - 1.0) < 1e-6);
  }
}

TEST_CASE("domain exit carries the failure time") {
  const auto dg = make_double_gyre();
  GriddedField g;
  g.axes = {Vec{0.0, 0.25, 0.5}, Vec{0.0, 0.5, 1.0}};
  g.times = {0.0, 10.0};
  for (int ti = 0; ti < 2; ++ti)
    for (double x : g.axes[0])
      for (double y : g.axes[1]) {
        g.velocity.push_back(0.2);  // uniform drift out through x = 0.5
        g.velocity.push_back(0.0);
      }
  const auto m = model_from_grid(g);
  CHECK_THROWS_AS(solve_flow(m, {0.4, 0.5}, 5.0), DomainError);
}

TEST_CASE("config validation") {
  IntegratorConfig cfg;
  cfg.step_size = 0.0;
  CHECK_THROWS_AS(solve_flow(make_zero_model(2), {0, 0}, 1.0, cfg), InvalidInputError);
  cfg.step_size = 2.0;
  CHECK_THROWS_AS(solve_flow(make_zero_model(2), {0, 0}, 1.0, cfg), InvalidInputError);
  CHECK_THROWS_AS(solve_flow_captures(make_zero_model(2), {0, 0}, {1.0, 0.5},
                                      IntegratorConfig{}),
                  InvalidInputError);
}
