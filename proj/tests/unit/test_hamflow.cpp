#include <cmath>
#include <memory>

#include "doctest.h"
#include "fracwkb/error.hpp"
#include "fracwkb/hamflow.hpp"

using namespace fracwkb;

namespace {

RealSymbol bump_hamiltonian(double eps, double sigma) {
  auto m = std::make_shared<const MetricField>(MetricField::gaussian_bump(1, 20.0, eps));
  return make_q0(m, semiclassical_psi(make_bump(0.125, 16.0, {0.25, 8.0}), sigma));
}

}  // namespace

TEST_CASE("flat power flow is the straight line") {
  for (double sigma : {0.5, 2.0, 3.0}) {
    const auto H = power_symbol(1, sigma);
    const Vec x = vec1(0.3), xi = vec1(-1.4);
    const double t = 0.37;
    const auto f = integrate_flow(H, t, x, xi);
    const double v = sigma * xi(0) * std::pow(std::abs(xi(0)), sigma - 2);
    CHECK(f.X(0) == doctest::Approx(x(0) + t * v).epsilon(1e-14));
    CHECK(f.Xi(0) == xi(0));
  }
  const auto H2 = power_symbol(2, 3.0);
  const auto f = integrate_flow(H2, -0.2, vec2(0, 1), vec2(0.6, 0.8));
  CHECK(f.X(0) == doctest::Approx(-0.2 * 3 * 0.6).epsilon(1e-14));
  CHECK(f.X(1) == doctest::Approx(1 - 0.2 * 3 * 0.8).epsilon(1e-14));
}

TEST_CASE("flow at time zero is the identity") {
  const auto H = bump_hamiltonian(0.5, 2.0);
  const auto f = integrate_flow(H, 0.0, vec1(0.2), vec1(1.1));
  CHECK(f.X(0) == 0.2);
  CHECK(f.Xi(0) == 1.1);
  const auto Z = variational_jacobian(H, 0.0, vec1(0.2), vec1(1.1));
  CHECK(Z == PhaseMat::Identity(2, 2));
}

TEST_CASE("bump flow agrees with its Richardson extrapolation") {
  const auto H = bump_hamiltonian(0.5, 2.0);
  FlowOptions coarse, fine;
  coarse.dt = 0.01;
  fine.dt = 0.005;
  const auto a = integrate_flow(H, 0.1, vec1(0.0), vec1(1.0), coarse);
  const auto b = integrate_flow(H, 0.1, vec1(0.0), vec1(1.0), fine);
  const double rx = (16 * b.X(0) - a.X(0)) / 15, rk = (16 * b.Xi(0) - a.Xi(0)) / 15;
  CHECK(std::abs(b.X(0) - rx) < 1e-8);
  CHECK(std::abs(b.Xi(0) - rk) < 1e-8);
  CHECK(b.X(0) != doctest::Approx(0.2));  // the metric bends the ray
}

TEST_CASE("variational jacobian of the free quadratic flow") {
  const auto H = power_symbol(1, 2.0);
  const auto Z = variational_jacobian(H, 0.3, vec1(1.0), vec1(0.7));
  CHECK(Z(0, 0) == doctest::Approx(1.0));
  CHECK(Z(0, 1) == doctest::Approx(0.6));
  CHECK(Z(1, 0) == doctest::Approx(0.0));
  CHECK(Z(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("variational jacobian matches central differences on the bump metric") {
  const auto H = bump_hamiltonian(0.5, 2.0);
  const double t = 0.4, e = 1e-5;
  const Vec x = vec1(0.1), xi = vec1(1.2);
  FlowOptions o;
  o.dt = 1e-3;
  const auto Z = variational_jacobian(H, t, x, xi, o);
  const auto px = integrate_flow(H, t, x + vec1(e), xi, o), mx = integrate_flow(H, t, x - vec1(e), xi, o);
  const auto pk = integrate_flow(H, t, x, xi + vec1(e), o), mk = integrate_flow(H, t, x, xi - vec1(e), o);
  CHECK(std::abs(Z(0, 0) - (px.X(0) - mx.X(0)) / (2 * e)) < 1e-6);
  CHECK(std::abs(Z(1, 0) - (px.Xi(0) - mx.Xi(0)) / (2 * e)) < 1e-6);
  CHECK(std::abs(Z(0, 1) - (pk.X(0) - mk.X(0)) / (2 * e)) < 1e-6);
  CHECK(std::abs(Z(1, 1) - (pk.Xi(0) - mk.Xi(0)) / (2 * e)) < 1e-6);
  // Hamiltonian flows are symplectic: det Z = 1 in d = 1.
  CHECK(Z.determinant() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("inverse map") {
  SUBCASE("time zero") {
    const auto r = inverse_map(bump_hamiltonian(0.5, 2.0), 0.0, vec1(0.4), vec1(1.0));
    CHECK(r.Y(0) == 0.4);
  }
  SUBCASE("flat inverse is the backward line") {
    const auto r = inverse_map(power_symbol(1, 3.0), 0.25, vec1(0.4), vec1(1.5));
    CHECK(r.Y(0) == doctest::Approx(0.4 - 0.25 * 3 * 1.5 * 1.5).epsilon(1e-12));
  }
  SUBCASE("bump residual") {
    const auto H = bump_hamiltonian(0.5, 2.0);
    for (double x : {-1.0, 0.0, 0.3, 1.5}) {
      const auto r = inverse_map(H, 0.3, vec1(x), vec1(1.0));
      const auto f = integrate_flow(H, 0.3, r.Y, vec1(1.0));
      CHECK(std::abs(f.X(0) - x) < 1e-10);
    }
  }
  SUBCASE("non-convergence is a caustic error") {
    InverseOptions inv;
    inv.max_iterations = 1;
    inv.tol = 1e-300;
    CHECK_THROWS_AS(inverse_map(bump_hamiltonian(0.5, 2.0), 0.3, vec1(0.5), vec1(1.0), {}, inv),
                    CausticError);
  }
}

TEST_CASE("group property and energy conservation") {
  const auto H = bump_hamiltonian(0.5, 2.0);
  const Vec x = vec1(-0.3), xi = vec1(0.9);
  const auto ts = integrate_flow(H, 0.35, x, xi);
  const auto s = integrate_flow(H, 0.15, x, xi);
  const auto composed = integrate_flow(H, 0.2, s.X, s.Xi);
  FlowOptions fine;
  fine.dt = 5e-3;
  const auto ref = integrate_flow(H, 0.35, x, xi, fine);
  const double tol = std::max(std::abs(ts.X(0) - ref.X(0)), 1e-13);
  CHECK(std::abs(composed.X(0) - ts.X(0)) < 10 * tol + 1e-12);
  for (double t : {-0.5, 0.5}) {
    const auto f = integrate_flow(H, t, x, xi);
    CHECK(std::abs(H(f.X, f.Xi) - H(x, xi)) < 1e-8);
  }
}

TEST_CASE("leaving the guard band is an error") {
  FlowOptions o;
  o.guard = {0.95, 1.05};
  // The bump decelerates the ray so |Xi| changes by O(eps).
  CHECK_THROWS_AS(integrate_flow(bump_hamiltonian(0.5, 2.0), 1.0, vec1(-0.8), vec1(1.0), o),
                  GuardBandError);
}

TEST_CASE("flow table bounds are stable under refinement") {
  const auto H = bump_hamiltonian(0.1, 2.0);
  auto build = [&](int nt, int nx) {
    std::vector<double> ts;
    for (int i = -nt; i <= nt; ++i) ts.push_back(0.5 * i / nt);
    std::vector<Vec> xs, ks;
    for (int i = 0; i < nx; ++i) xs.push_back(vec1(-3.0 + 6.0 * i / nx));
    for (double k : {0.75, 1.0, 1.25}) ks.push_back(vec1(k));
    return fit_flow_bounds(build_flow_table(H, ts, xs, ks));
  };
  const auto a = build(8, 24), b = build(16, 48);
  CHECK(std::isfinite(a.jacobian_constant));
  CHECK(b.jacobian_constant == doctest::Approx(a.jacobian_constant).epsilon(0.1));
  CHECK(b.inverse_constant == doctest::Approx(a.inverse_constant).epsilon(0.1));
  CHECK(b.max_energy_error < 1e-8);
  CHECK(b.horizon == doctest::Approx(0.5));
}

TEST_CASE("flat flow table has the full horizon and zero energy error") {
  const auto H = power_symbol(1, 2.0);
  const auto tab = build_flow_table(H, {-0.2, 0.0, 0.1, 0.3}, {vec1(0.0)}, {vec1(1.0)});
  CHECK(tab.node(1, 0, 0).X(0) == 0.0);
  CHECK(tab.node(0, 0, 0).X(0) == doctest::Approx(-0.4));
  const auto b = fit_flow_bounds(tab);
  CHECK(b.horizon == doctest::Approx(0.3));
  CHECK(b.inverse_constant == doctest::Approx(2.0));
}
