#include <cmath>
#include <memory>

#include "doctest.h"
#include "fracwkb/error.hpp"
#include "fracwkb/fio.hpp"
#include "fracwkb/transport.hpp"

using namespace fracwkb;

namespace {

const double kL = 4 * kPi;
const CutoffFunction kPhi = make_bump(0.25, 4.0, {0.5, 2.0});

std::shared_ptr<const MetricField> metric(double eps) {
  return std::make_shared<const MetricField>(eps == 0.0 ? MetricField::flat(1, kL)
                                                        : MetricField::gaussian_bump(1, kL, eps));
}

RealSymbol q0_for(double eps, double sigma) { return make_q0(metric(eps), semiclassical_psi(kPhi.widened(eps == 0.0 ? 1.0 : 2.0), sigma)); }

RealSymbol amplitude(double eps, double kappa = 2.0) {
  return cutoff_symbol(metric(eps), kPhi, periodic_envelope(kL, kappa));
}

// b(x, eta) = eta^2, x-independent.
SymbolFunction kinetic() {
  return SymbolFunction(
      1,
      [](const Vec& x, const Vec& xi) {
        auto j = SymbolJet<Complex>::zero(x.size());
        j.value = xi(0) * xi(0);
        j.grad_xi(0) = 2 * xi(0);
        j.hess_xixi(0, 0) = 2.0;
        return j;
      },
      true);
}

PhasePoint flat_point(const Vec& x, const Vec& xi) {
  PhasePoint s;
  s.Y = x;
  s.grad_x = xi;
  s.hess_xx = Mat::Zero(1, 1);
  return s;
}

}  // namespace

TEST_CASE("flat transport is a shift along the group velocity") {
  for (double sigma : {0.5, 2.0, 3.0}) {
    const auto q0 = q0_for(0.0, sigma);
    const auto a = amplitude(0.0);
    for (double t : {-0.3, 0.2, 0.7})
      for (double x : {-1.0, 0.4})
        for (double k : {-1.2, 0.8}) {
          const auto v = amplitude_at(a, q0, t, vec1(x), vec1(k), 1);
          const double shift = t * sigma * k * std::pow(std::abs(k), sigma - 2);
          CHECK(std::abs(v[0] - a(vec1(x + shift), vec1(k))) < 1e-11);
          CHECK(v[0].imag() == 0.0);
        }
  }
}

TEST_CASE("transport at time zero returns the initial data") {
  const auto q0 = q0_for(0.0, 2.0);
  const auto a = amplitude(0.0);
  const auto phase = build_phase(q0, {0.0}, {vec1(-0.5), vec1(0.3)}, {vec1(0.9), vec1(-1.3)});
  const auto tab = solve_transport(a, phase, q0, 2);
  for (std::size_t ix = 0; ix < 2; ++ix)
    for (std::size_t ik = 0; ik < 2; ++ik) {
      const auto& n = tab.node(0, ix, ik);
      CHECK(std::abs(n.a[0] - a(tab.xs()[ix], tab.xis()[ik])) < 1e-15);
      CHECK(std::abs(n.a[1]) == 0.0);
      CHECK(std::abs(n.f) < 1e-15);
    }
}

TEST_CASE("bump-metric transport residual") {
  const auto q0 = q0_for(0.1, 2.0);
  const auto a = amplitude(0.1);
  PhaseOptions o;
  o.flow.dt = 2.5e-3;
  double worst = 0.0;
  for (double x : {-0.8, 0.1, 0.6})
    for (double k : {0.9, 1.3}) worst = std::max(worst, transport_residual(a, q0, 0.3, vec1(x), vec1(k), 1e-3, o));
  CHECK(worst < 1e-5);
  // Central differences: the residual falls at second order as the stencil shrinks.
  const double coarse = transport_residual(a, q0, 0.3, vec1(0.1), vec1(1.3), 4e-3, o);
  const double fine = transport_residual(a, q0, 0.3, vec1(0.1), vec1(1.3), 2e-3, o);
  CHECK(std::log2(coarse / fine) >= 1.8);
}

TEST_CASE("transported support stays near the initial band") {
  const auto m = metric(0.1);
  const auto q0 = q0_for(0.1, 2.0);
  const auto a = cutoff_symbol(m, kPhi, constant_envelope(1));
  std::vector<Vec> xs, ks;
  for (int i = 0; i <= 12; ++i) xs.push_back(vec1(-3.0 + 0.5 * i));
  for (int i = 0; i <= 24; ++i) ks.push_back(vec1(0.05 + 0.1 * i));
  const auto phase = build_phase(q0, {0.0, 0.2, 0.4}, xs, ks);
  const auto tab = solve_transport(a, phase, q0, 1);
  CHECK(tab.max_value() > 0.5);
  // p is conserved along the flow, so the support moves by at most the metric ratio.
  const Interval near{0.25 / 1.1, 4.0 * 1.1};
  CHECK(tab.max_outside(*m, near) == 0.0);
  CHECK(tab.max_outside(*m, {0.3, 3.5}) > 0.0);
}

TEST_CASE("order-2 amplitudes need a flat phase") {
  CHECK_THROWS_AS(transported_amplitude(amplitude(0.1), q0_for(0.1, 2.0), 0.2, 2), InvalidArgument);
  CHECK_THROWS_AS(transported_amplitude(amplitude(0.0), q0_for(0.0, 2.0), 0.2, 3), InvalidArgument);
  CHECK_NOTHROW(transported_amplitude(amplitude(0.0), q0_for(0.0, 2.0), 0.2, 2));
}

TEST_CASE("composition symbols: pointwise examples") {
  const auto b = kinetic();
  const auto c = to_complex(amplitude(0.0));
  const Vec x = vec1(0.4), k = vec1(1.1);
  SUBCASE("c = 1 gives b at the phase gradient") {
    const SymbolFunction one(1, [](const Vec& y, const Vec&) {
      auto j = SymbolJet<Complex>::zero(y.size());
      j.value = 1.0;
      return j;
    });
    auto s = flat_point(x, k);
    s.grad_x = vec1(1.7);
    CHECK(std::abs(compose_fio_0(b, one)(x, k, s, 0.1) - 1.7 * 1.7) < 1e-15);
    CHECK(std::abs(compose_fio_1(b, one)(x, k, s, 0.1)) < 1e-15);
  }
  SUBCASE("t = 0 gives the product and the transport derivative") {
    const auto s = flat_point(x, k);
    CHECK(std::abs(compose_fio_0(b, c)(x, k, s, 0.1) - b(x, k) * c(x, k)) < 1e-15);
    const Complex expected = Complex(0.0, -1.0) * 2.0 * k(0) * c.jet(x, k).grad_x(0);
    CHECK(std::abs(compose_fio_1(b, c)(x, k, s, 0.1) - expected) < 1e-14);
  }
  SUBCASE("flat second-order term") {
    CHECK(std::abs(compose_flat_2(b, c, x, k) + c.jet(x, k).hess_xx(0, 0)) < 1e-14);
  }
}

TEST_CASE("operator-level composition with a flat phase") {
  // Op_h(b) J_h(S, c) against J_h(S, (b<|c)_0 + h (b<|c)_1); b = eta^2 leaves an h^2 term.
  const auto q0 = q0_for(0.0, 2.0);
  const auto c = to_complex(amplitude(0.0));
  const auto b = kinetic();
  const SampledPhase phase(q0, 0.1, kL);
  auto errors = [&](double h) {
    const PeriodicGrid grid(1, 512, kL);
    const auto u = gaussian_packet(grid, vec1(0.0), 0.6, vec1(1.1 / h));
    const auto lhs = apply_pseudo(b, apply_fio(phase, symbol_amplitude(c), u, h), h, {1e-12, 1e12});
    const double e0 = (lhs - apply_fio(phase, compose_fio(b, c, 1), u, h)).l2_norm() / u.l2_norm();
    const double e1 = (lhs - apply_fio(phase, compose_fio(b, c, 2), u, h)).l2_norm() / u.l2_norm();
    return std::pair{e0, e1};
  };
  const auto [a0, a1] = errors(1.0 / 16);
  const auto [b0, b1] = errors(1.0 / 32);
  CHECK(std::log2(a0 / b0) == doctest::Approx(1.0).epsilon(0.15));
  CHECK(std::log2(a1 / b1) >= 1.8);
  CHECK(b1 < b0);
}

TEST_CASE("operator-level composition with a bump-metric phase") {
  const auto m = metric(0.1);
  const auto q0 = q0_for(0.1, 2.0);
  const auto c = to_complex(amplitude(0.1));
  const auto b = kinetic();
  FioOptions o;
  o.band = {0.5 / std::sqrt(1.1), 2.0};
  const SampledPhase phase(q0, 0.1, kL, o);
  auto err = [&](double h) {
    const PeriodicGrid grid(1, 512, kL);
    const auto u = gaussian_packet(grid, vec1(0.2), 0.6, vec1(1.1 / h));
    const auto lhs = apply_pseudo(b, apply_fio(phase, symbol_amplitude(c), u, h), h, {1e-12, 1e12});
    return (lhs - apply_fio(phase, compose_fio(b, c, 2), u, h)).l2_norm() / u.l2_norm();
  };
  CHECK(std::log2(err(1.0 / 16) / err(1.0 / 32)) >= 1.8);
}
