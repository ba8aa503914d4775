#pragma once

#include <string>
#include <vector>

#include "fracwkb/hamflow.hpp"
#include "fracwkb/symbols.hpp"

namespace fracwkb {

/// The phase solves dS/dt = q0(x, grad_x S), S(0) = x . xi. It is built from
/// characteristics of H = -q0 (the form dS/dt + H(x, grad_x S) = 0); the
/// negation happens here and nowhere else.
RealSymbol characteristic_hamiltonian(const RealSymbol& q0);

struct PhaseOptions {
  FlowOptions flow;
  InverseOptions inverse;
  const SymbolFunction* q1 = nullptr;  // optional subprincipal term for the transport factor
};

/// Phase and derivatives at one (t, x, xi), read off the characteristic that
/// reaches x at time t.
struct PhaseNode {
  double S = 0.0;
  double dS_dt = 0.0;    // q0(Y, xi), equal to q0(x, grad_x S) by energy conservation
  double d2S_dt2 = 0.0;  // grad_x q0(Y, xi) . dY/dt
  Vec Y;                 // foot point, X(t, Y, xi) = x
  Vec grad_x;            // Xi(t, Y, xi)
  Vec grad_xi;           // Y
  Mat hess_xx;           // Xi_y X_y^{-1}
  Mat hess_xxi;          // (i, j) = d^2 S / dx_i dxi_j = dY_j / dx_i
  Mat hess_xixi;         // -X_y^{-1} X_eta
  Mat flow_dx;           // X_y = d X / d y at the foot point
  Complex log_amplitude{};  // int_0^t f along the characteristic (transport factor)
  int newton_iterations = 0;
};

PhaseNode phase_at(const RealSymbol& q0, double t, const Vec& x, const Vec& xi,
                   const PhaseOptions& opts = {});

class PhaseTable {
 public:
  PhaseTable(std::vector<double> times, std::vector<Vec> xs, std::vector<Vec> xis)
      : times_(std::move(times)), xs_(std::move(xs)), xis_(std::move(xis)),
        nodes_(times_.size() * xs_.size() * xis_.size()) {}

  const std::vector<double>& times() const { return times_; }
  const std::vector<Vec>& xs() const { return xs_; }
  const std::vector<Vec>& xis() const { return xis_; }
  const PhaseNode& node(std::size_t it, std::size_t ix, std::size_t ik) const {
    return nodes_[index(it, ix, ik)];
  }
  PhaseNode& node(std::size_t it, std::size_t ix, std::size_t ik) { return nodes_[index(it, ix, ik)]; }

 private:
  std::size_t index(std::size_t it, std::size_t ix, std::size_t ik) const {
    return (it * xs_.size() + ix) * xis_.size() + ik;
  }
  std::vector<double> times_;
  std::vector<Vec> xs_, xis_;
  std::vector<PhaseNode> nodes_;
};

/// Evaluates the phase on the tensor grid. Each (x, xi) column is swept
/// outward from t = 0 so Newton starts from an extrapolated foot point.
/// Throws CausticError naming the failing node.
PhaseTable build_phase(const RealSymbol& q0, std::vector<double> times, std::vector<Vec> xs,
                       std::vector<Vec> xis, const PhaseOptions& opts = {});

/// max |dS/dt - q0(x, grad_x S)| with dS/dt from fourth-order central
/// differences of S over a uniform time grid (interior nodes only).
double hj_residual(const PhaseTable& table, const RealSymbol& q0);

struct PhaseEstimates {
  double first_order = 0.0;   // max |d(S - x.xi)| / |t| over value and first derivatives
  double second_order = 0.0;  // max |S - x.xi - t q0(x, xi)| / t^2
};

PhaseEstimates certify_phase_estimates(const PhaseTable& table, const RealSymbol& q0);

struct Horizon {
  double t0 = 0.0;
  /// Which smallness condition fails first beyond t0: "mixed-hessian",
  /// "flow-jacobian", or "grid" when neither fails on the grid.
  std::string binding = "grid";
};

/// Largest grid |t| such that ||hess_xxi S - I|| <= 1/2 and ||X_y - I|| <= 1/2
/// at every node with smaller or equal |t|. Throws ResolutionError if the
/// conditions already fail at the first nonzero grid time.
Horizon caustic_horizon(const PhaseTable& table);

}  // namespace fracwkb
