#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "fracwkb/symbols.hpp"
#include "fracwkb/types.hpp"

namespace fracwkb {

/// Admissible range for |Xi| along trajectories. The WKB constructions keep
/// frequencies in a compact set away from zero; leaving it is an error.
struct GuardBand {
  double min_norm = 0.0;
  double max_norm = std::numeric_limits<double>::infinity();
};

struct FlowOptions {
  double dt = 1e-2;  // fixed RK4 step; the last step is shortened to land on t
  GuardBand guard;
};

/// Flow plus whatever rides along the characteristic.
struct FlowState {
  Vec X, Xi;
  PhaseMat Z;               // d(X, Xi) / d(x, xi), only when requested
  double action = 0.0;      // int_0^t (Xi . grad_xi H - H) ds
  Complex log_amplitude{};  // int_0^t f ds, f the transport zeroth-order coefficient
};

/// What to integrate alongside (X, Xi).
struct FlowExtras {
  bool jacobian = false;
  bool action = false;
  /// Accumulate f = 1/2 tr(hess_xi q0 . hess_x S) + i q1 with q0 = -H; implies jacobian.
  bool transport = false;
  const SymbolFunction* q1 = nullptr;
};

/// Classical RK4 integration of Xdot = grad_xi H, Xidot = -grad_x H (and the
/// requested extras) from (x, xi) at time 0 to time t (t may be negative).
FlowState integrate_characteristic(const RealSymbol& H, double t, const Vec& x, const Vec& xi,
                                   const FlowOptions& opts, const FlowExtras& extras);

struct FlowPoint {
  Vec X, Xi;
};

FlowPoint integrate_flow(const RealSymbol& H, double t, const Vec& x, const Vec& xi,
                         const FlowOptions& opts = {});

/// Z(t) = d Phi_H(t) / d(x, xi), solving Zdot = A(t) Z, Z(0) = I.
PhaseMat variational_jacobian(const RealSymbol& H, double t, const Vec& x, const Vec& xi,
                              const FlowOptions& opts = {});

struct InverseOptions {
  double tol = 1e-12;
  int max_iterations = 50;
  double damping = 0.5;  // step shrink factor when the residual fails to decrease
  Vec start;             // Newton starting point; empty means x
};

struct InverseResult {
  Vec Y;
  FlowState state;  // characteristic started at (Y, xi), integrated to t
  int iterations = 0;
};

/// Solves X(t, Y, xi) = x by damped Newton started at Y = x. Throws
/// CausticError when the iteration does not converge.
InverseResult inverse_map(const RealSymbol& H, double t, const Vec& x, const Vec& xi,
                          const FlowOptions& opts = {}, const InverseOptions& inv = {},
                          const FlowExtras& extras = {});

/// Flow samples on a tensor grid (time x space x frequency).
class FlowTable {
 public:
  struct Node {
    Vec X, Xi;
    PhaseMat Z;
    double energy_error = 0.0;
  };

  FlowTable(std::vector<double> times, std::vector<Vec> xs, std::vector<Vec> xis)
      : times_(std::move(times)), xs_(std::move(xs)), xis_(std::move(xis)),
        nodes_(times_.size() * xs_.size() * xis_.size()) {}

  const std::vector<double>& times() const { return times_; }
  const std::vector<Vec>& xs() const { return xs_; }
  const std::vector<Vec>& xis() const { return xis_; }
  const Node& node(std::size_t it, std::size_t ix, std::size_t ik) const {
    return nodes_[index(it, ix, ik)];
  }
  Node& node(std::size_t it, std::size_t ix, std::size_t ik) { return nodes_[index(it, ix, ik)]; }

 private:
  std::size_t index(std::size_t it, std::size_t ix, std::size_t ik) const {
    return (it * xs_.size() + ix) * xis_.size() + ik;
  }
  std::vector<double> times_;
  std::vector<Vec> xs_, xis_;
  std::vector<Node> nodes_;
};

/// Integrates every (x, xi) column through the (sorted) time grid, which must
/// contain 0 or start at 0.
FlowTable build_flow_table(const RealSymbol& H, std::vector<double> times, std::vector<Vec> xs,
                           std::vector<Vec> xis, const FlowOptions& opts = {});

struct FlowBounds {
  double jacobian_constant = 0.0;   // max ||Z(t) - I|| / |t|
  double inverse_constant = 0.0;    // max |Y(t, x, xi) - x| / |t|
  double max_energy_error = 0.0;
  /// Largest grid time T with ||grad_x X - I|| <= 1/2 for all |t| <= T.
  double horizon = 0.0;
};

/// Fitted constants for the flow and inverse-map linear-in-t bounds. The
/// inverse constant is measured through the flow: Y(t, X(t, y), xi) = y, so
/// |Y - x| at x = X(t, y) equals |X(t, y) - y|.
FlowBounds fit_flow_bounds(const FlowTable& table);

}  // namespace fracwkb
