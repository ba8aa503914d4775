#include "fracwkb/transport.hpp"

#include <algorithm>
#include <cmath>

#include "fracwkb/error.hpp"

namespace fracwkb {

PhasePoint to_phase_point(const Vec& x, const Vec& xi, const PhaseNode& node) {
  PhasePoint s;
  s.W = node.S - x.dot(xi);
  s.Y = node.Y;
  s.grad_x = node.grad_x;
  s.hess_xx = node.hess_xx;
  s.log_amplitude = node.log_amplitude;
  return s;
}

AmplitudeFn symbol_amplitude(const SymbolFunction& c) {
  return [c](const Vec& x, const Vec& xi, const PhasePoint&, double) { return c(x, xi); };
}

AmplitudeFn compose_fio_0(const SymbolFunction& b, const SymbolFunction& c) {
  return [b, c](const Vec& x, const Vec& xi, const PhasePoint& s, double) { return b(x, s.grad_x) * c(x, xi); };
}

AmplitudeFn compose_fio_1(const SymbolFunction& b, const SymbolFunction& c) {
  return [b, c](const Vec& x, const Vec& xi, const PhasePoint& s, double) {
    const auto bj = b.jet(x, s.grad_x);
    const auto cj = c.jet(x, xi);
    Complex sum = bj.grad_xi.cwiseProduct(cj.grad_x).sum();
    const CMat hs = s.hess_xx.cast<Complex>();
    sum += 0.5 * (bj.hess_xixi * hs).trace() * cj.value;
    return Complex(0.0, -1.0) * sum;
  };
}

AmplitudeFn compose_fio(const SymbolFunction& b, const SymbolFunction& c, int order) {
  if (order < 1 || order > 2) throw InvalidArgument("composition order must be 1 or 2");
  const auto c0 = compose_fio_0(b, c);
  if (order == 1) return c0;
  const auto c1 = compose_fio_1(b, c);
  return [c0, c1](const Vec& x, const Vec& xi, const PhasePoint& s, double h) {
    return c0(x, xi, s, h) + h * c1(x, xi, s, h);
  };
}

Complex compose_flat_2(const SymbolFunction& b, const SymbolFunction& c, const Vec& x, const Vec& xi) {
  const auto bj = b.jet(x, xi);
  const auto cj = c.jet(x, xi);
  return -0.5 * (bj.hess_xixi * cj.hess_xx).trace();
}

namespace {

void check_order(const RealSymbol& q0, int order) {
  if (order < 1) throw InvalidArgument("amplitude order must be >= 1");
  if (order > 2) throw InvalidArgument("amplitude orders above 2 are not supported");
  if (order == 2 && !q0.x_independent())
    throw InvalidArgument("order-2 amplitudes require an x-independent q0 (flat metric)");
}

}  // namespace

AmplitudeFn transported_amplitude(const RealSymbol& a, const RealSymbol& q0, double t, int order) {
  check_order(q0, order);
  if (order == 1) {
    return [a](const Vec&, const Vec& xi, const PhasePoint& s, double) {
      return a(s.Y, xi) * std::exp(s.log_amplitude);
    };
  }
  return [a, q0, t](const Vec&, const Vec& xi, const PhasePoint& s, double h) {
    const auto aj = a.jet(s.Y, xi);
    const Mat q2 = q0.jet(s.Y, xi).hess_xixi;
    const Complex a1 = Complex(0.0, -0.5 * t) * (q2 * aj.hess_xx).trace();
    return (aj.value + h * a1) * std::exp(s.log_amplitude);
  };
}

double AmplitudeTable::max_outside(const MetricField& m, const Interval& J) const {
  double worst = 0.0;
  for (std::size_t it = 0; it < times_.size(); ++it)
    for (std::size_t ix = 0; ix < xs_.size(); ++ix)
      for (std::size_t ik = 0; ik < xis_.size(); ++ik) {
        if (J.contains(principal_symbol(m, xs_[ix], xis_[ik]))) continue;
        for (const auto& v : node(it, ix, ik).a) worst = std::max(worst, std::abs(v));
      }
  return worst;
}

double AmplitudeTable::max_value() const {
  double worst = 0.0;
  for (const auto& n : nodes_)
    for (const auto& v : n.a) worst = std::max(worst, std::abs(v));
  return worst;
}

namespace {

std::vector<Complex> amplitudes_from_node(const RealSymbol& a, const RealSymbol& q0, double t, const Vec& x,
                                          const Vec& xi, const PhaseNode& node, int order) {
  const auto s = to_phase_point(x, xi, node);
  std::vector<Complex> out;
  const auto aj = a.jet(s.Y, xi);
  const Complex factor = std::exp(s.log_amplitude);
  out.push_back(aj.value * factor);
  if (order >= 2) {
    const Mat q2 = q0.jet(s.Y, xi).hess_xixi;
    out.push_back(Complex(0.0, -0.5 * t) * (q2 * aj.hess_xx).trace() * factor);
  }
  return out;
}

}  // namespace

AmplitudeTable solve_transport(const RealSymbol& a_init, const PhaseTable& phase, const RealSymbol& q0,
                               int order, const SymbolFunction* q1) {
  check_order(q0, order);
  AmplitudeTable out(order, phase);
  for (std::size_t it = 0; it < phase.times().size(); ++it)
    for (std::size_t ix = 0; ix < phase.xs().size(); ++ix)
      for (std::size_t ik = 0; ik < phase.xis().size(); ++ik) {
        const auto& pn = phase.node(it, ix, ik);
        const Vec& x = phase.xs()[ix];
        const Vec& xi = phase.xis()[ik];
        auto& n = out.node(it, ix, ik);
        n.a = amplitudes_from_node(a_init, q0, phase.times()[it], x, xi, pn, order);
        const auto qj = q0.jet(x, pn.grad_x);
        n.V = qj.grad_xi;
        n.f = 0.5 * (qj.hess_xixi * pn.hess_xx).trace();
        if (q1) n.f += Complex(0.0, 1.0) * (*q1)(x, pn.grad_x);
      }
  return out;
}

std::vector<Complex> amplitude_at(const RealSymbol& a_init, const RealSymbol& q0, double t, const Vec& x,
                                  const Vec& xi, int order, const PhaseOptions& opts) {
  check_order(q0, order);
  return amplitudes_from_node(a_init, q0, t, x, xi, phase_at(q0, t, x, xi, opts), order);
}

double transport_residual(const RealSymbol& a_init, const RealSymbol& q0, double t, const Vec& x,
                          const Vec& xi, double delta, const PhaseOptions& opts) {
  auto a0 = [&](double s, const Vec& y) { return amplitude_at(a_init, q0, s, y, xi, 1, opts)[0]; };
  const auto node = phase_at(q0, t, x, xi, opts);
  const auto qj = q0.jet(x, node.grad_x);
  Complex f = 0.5 * (qj.hess_xixi * node.hess_xx).trace();
  if (opts.q1) f += Complex(0.0, 1.0) * (*opts.q1)(x, node.grad_x);
  const Complex value = a_init(node.Y, xi) * std::exp(node.log_amplitude);
  Complex res = (a0(t + delta, x) - a0(t - delta, x)) / (2 * delta) - f * value;
  for (int i = 0; i < x.size(); ++i) {
    Vec e = Vec::Zero(x.size());
    e(i) = delta;
    res -= qj.grad_xi(i) * (a0(t, x + e) - a0(t, x - e)) / (2 * delta);
  }
  return std::abs(res);
}

}  // namespace fracwkb
