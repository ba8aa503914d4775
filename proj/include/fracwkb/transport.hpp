#pragma once

#include <functional>
#include <vector>

#include "fracwkb/hamjac.hpp"
#include "fracwkb/symbols.hpp"

namespace fracwkb {

/// What an amplitude sees of a fixed-time phase at (x, xi).
struct PhasePoint {
  double W = 0.0;  // S - x . xi
  Vec Y;           // foot point (grad_xi S)
  Vec grad_x;      // grad_x S
  Mat hess_xx;     // hess_x S
  Complex log_amplitude{};
};

PhasePoint to_phase_point(const Vec& x, const Vec& xi, const PhaseNode& node);

/// Amplitude of an FIO at fixed time, evaluated with the phase data in hand.
/// `h` lets amplitudes carry their own semiclassical expansion a0 + h a1 + ...
using AmplitudeFn = std::function<Complex(const Vec& x, const Vec& xi, const PhasePoint& s, double h)>;

/// c(x, xi), ignoring the phase.
AmplitudeFn symbol_amplitude(const SymbolFunction& c);

/// (b <| c)_0 = b(x, grad_x S) c(x, xi).
AmplitudeFn compose_fio_0(const SymbolFunction& b, const SymbolFunction& c);
/// (b <| c)_1 = -i [grad_eta b(x, grad_x S) . grad_x c + 1/2 tr(hess_eta b(x, grad_x S) hess_x S) c].
AmplitudeFn compose_fio_1(const SymbolFunction& b, const SymbolFunction& c);
/// (b <| c)_0 + h (b <| c)_1.
AmplitudeFn compose_fio(const SymbolFunction& b, const SymbolFunction& c, int order);

/// Second-order term for an x-independent b against a flat phase:
/// -1/2 tr(hess_eta b . hess_x c).
Complex compose_flat_2(const SymbolFunction& b, const SymbolFunction& c, const Vec& x, const Vec& xi);

/// a0 + h a1 + ... with
///   a0 = a(Y, xi) exp(int_0^t f),
///   a1 = -(i t / 2) tr(hess_xi q0(xi) hess_x a(Y, xi))   (order 2, flat q0 only).
/// Order 2 with an x-dependent q0 is rejected: it needs the general second
/// composition symbol and subprincipal terms.
AmplitudeFn transported_amplitude(const RealSymbol& a, const RealSymbol& q0, double t, int order);

/// Transport data on the nodes of a phase table.
class AmplitudeTable {
 public:
  struct Node {
    std::vector<Complex> a;  // a_0 .. a_{N-1}
    Vec V;                   // grad_xi q0(x, grad_x S)
    Complex f{};             // 1/2 tr(hess_xi q0(x, grad_x S) hess_x S) + i q1
  };

  AmplitudeTable(int order, const PhaseTable& phase)
      : order_(order), times_(phase.times()), xs_(phase.xs()), xis_(phase.xis()),
        nodes_(times_.size() * xs_.size() * xis_.size()) {}

  int order() const { return order_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<Vec>& xs() const { return xs_; }
  const std::vector<Vec>& xis() const { return xis_; }
  const Node& node(std::size_t it, std::size_t ix, std::size_t ik) const { return nodes_[index(it, ix, ik)]; }
  Node& node(std::size_t it, std::size_t ix, std::size_t ik) { return nodes_[index(it, ix, ik)]; }

  /// max |a_j| over nodes with p(x, xi) outside J.
  double max_outside(const MetricField& m, const Interval& J) const;
  /// max |a_j| over all nodes.
  double max_value() const;

 private:
  std::size_t index(std::size_t it, std::size_t ix, std::size_t ik) const {
    return (it * xs_.size() + ix) * xis_.size() + ik;
  }
  int order_;
  std::vector<double> times_;
  std::vector<Vec> xs_, xis_;
  std::vector<Node> nodes_;
};

/// Solves the transport hierarchy by characteristics on the nodes of `phase`.
/// The optional q1 enters through the phase build (PhaseOptions::q1) and is
/// passed here only to evaluate f.
AmplitudeTable solve_transport(const RealSymbol& a_init, const PhaseTable& phase, const RealSymbol& q0,
                               int order, const SymbolFunction* q1 = nullptr);

/// Pointwise amplitudes a_0 .. a_{N-1} at (t, x, xi).
std::vector<Complex> amplitude_at(const RealSymbol& a_init, const RealSymbol& q0, double t, const Vec& x,
                                  const Vec& xi, int order, const PhaseOptions& opts = {});

/// |d_t a0 - V . grad_x a0 - f a0| by central differences of step delta.
double transport_residual(const RealSymbol& a_init, const RealSymbol& q0, double t, const Vec& x,
                          const Vec& xi, double delta, const PhaseOptions& opts = {});

}  // namespace fracwkb
