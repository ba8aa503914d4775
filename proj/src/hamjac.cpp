#include "fracwkb/hamjac.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <Eigen/SVD>

#include "fracwkb/error.hpp"

namespace fracwkb {

namespace {

PhaseNode phase_from_characteristic(const RealSymbol& H, const RealSymbol& q0, double t,
                                    const Vec& x, const Vec& xi, const PhaseOptions& opts,
                                    const InverseOptions& inv) {
  FlowExtras ex;
  ex.jacobian = true;
  ex.action = true;
  ex.transport = true;
  ex.q1 = opts.q1;
  const InverseResult r = inverse_map(H, t, x, xi, opts.flow, inv, ex);
  const int d = static_cast<int>(x.size());
  const Mat Xy = r.state.Z.topLeftCorner(d, d);
  const Mat Xeta = r.state.Z.topRightCorner(d, d);
  const Mat Xiy = r.state.Z.bottomLeftCorner(d, d);
  const Mat Xy_inv = Xy.inverse();

  PhaseNode n;
  n.Y = r.Y;
  n.S = r.Y.dot(xi) + r.state.action;
  n.grad_x = r.state.Xi;
  n.grad_xi = r.Y;
  n.hess_xx = Xiy * Xy_inv;
  n.hess_xxi = Xy_inv.transpose();
  n.hess_xixi = -Xy_inv * Xeta;
  n.flow_dx = Xy;
  n.log_amplitude = r.state.log_amplitude;
  n.newton_iterations = r.iterations;

  const auto at_foot = q0.jet(r.Y, xi);
  n.dS_dt = at_foot.value;
  const Vec dY_dt = Xy_inv * q0.jet(x, r.state.Xi).grad_xi;
  n.d2S_dt2 = at_foot.grad_x.dot(dY_dt);
  return n;
}

double spectral_norm(const Mat& m) { return Eigen::JacobiSVD<Mat>(m).singularValues()(0); }

}  // namespace

RealSymbol characteristic_hamiltonian(const RealSymbol& q0) {
  return RealSymbol(
      q0.dim(),
      [q0](const Vec& x, const Vec& xi) {
        auto j = q0.jet(x, xi);
        j.value = -j.value;
        j.grad_x = -j.grad_x;
        j.grad_xi = -j.grad_xi;
        j.hess_xx = -j.hess_xx;
        j.hess_xxi = -j.hess_xxi;
        j.hess_xixi = -j.hess_xixi;
        return j;
      },
      q0.x_independent());
}

PhaseNode phase_at(const RealSymbol& q0, double t, const Vec& x, const Vec& xi,
                   const PhaseOptions& opts) {
  return phase_from_characteristic(characteristic_hamiltonian(q0), q0, t, x, xi, opts, opts.inverse);
}

PhaseTable build_phase(const RealSymbol& q0, std::vector<double> times, std::vector<Vec> xs,
                       std::vector<Vec> xis, const PhaseOptions& opts) {
  if (times.empty() || xs.empty() || xis.empty()) throw InvalidArgument("phase grids must be nonempty");
  if (!std::is_sorted(times.begin(), times.end())) throw InvalidArgument("phase times must be increasing");
  PhaseTable table(std::move(times), std::move(xs), std::move(xis));
  const RealSymbol H = characteristic_hamiltonian(q0);
  const auto& ts = table.times();

  std::vector<std::size_t> forward, backward;
  for (std::size_t i = 0; i < ts.size(); ++i) (ts[i] >= 0.0 ? forward : backward).push_back(i);
  std::reverse(backward.begin(), backward.end());

  for (std::size_t ix = 0; ix < table.xs().size(); ++ix) {
    for (std::size_t ik = 0; ik < table.xis().size(); ++ik) {
      const Vec& x = table.xs()[ix];
      const Vec& xi = table.xis()[ik];
      for (const auto* order : {&forward, &backward}) {
        double t1 = 0.0, t2 = 0.0;
        Vec y1 = x, y2 = x;
        int known = 1;  // y1 = Y(t1) is known; y2 = Y(t2) once known == 2
        for (std::size_t it : *order) {
          const double t = ts[it];
          InverseOptions inv = opts.inverse;
          inv.start = known == 2 && t1 != t2 ? Vec(y1 + (t - t1) / (t1 - t2) * (y1 - y2)) : y1;
          try {
            table.node(it, ix, ik) = phase_from_characteristic(H, q0, t, x, xi, opts, inv);
          } catch (const CausticError&) {
            std::ostringstream os;
            os << "phase construction failed at (t, x[0], xi[0]) = (" << t << ", " << x(0) << ", "
               << xi(0) << "): inverse map did not converge";
            throw CausticError(os.str());
          }
          y2 = y1;
          t2 = t1;
          y1 = table.node(it, ix, ik).Y;
          t1 = t;
          known = 2;
        }
      }
    }
  }
  return table;
}

double hj_residual(const PhaseTable& table, const RealSymbol& q0) {
  const auto& ts = table.times();
  if (ts.size() < 5) throw InsufficientData("HJ residual needs at least 5 time nodes");
  const double dt = ts[1] - ts[0];
  for (std::size_t i = 1; i < ts.size(); ++i)
    if (std::abs(ts[i] - ts[i - 1] - dt) > 1e-9 * std::abs(dt))
      throw InvalidArgument("HJ residual needs a uniform time grid");
  double worst = 0.0;
  for (std::size_t ix = 0; ix < table.xs().size(); ++ix) {
    for (std::size_t ik = 0; ik < table.xis().size(); ++ik) {
      for (std::size_t it = 2; it + 2 < ts.size(); ++it) {
        auto S = [&](std::size_t j) { return table.node(j, ix, ik).S; };
        const double dS = (S(it - 2) - 8.0 * S(it - 1) + 8.0 * S(it + 1) - S(it + 2)) / (12.0 * dt);
        const auto& n = table.node(it, ix, ik);
        worst = std::max(worst, std::abs(dS - q0(table.xs()[ix], n.grad_x)));
      }
    }
  }
  return worst;
}

PhaseEstimates certify_phase_estimates(const PhaseTable& table, const RealSymbol& q0) {
  PhaseEstimates e;
  const auto& ts = table.times();
  for (std::size_t it = 0; it < ts.size(); ++it) {
    const double t = ts[it];
    if (t == 0.0) continue;
    for (std::size_t ix = 0; ix < table.xs().size(); ++ix) {
      for (std::size_t ik = 0; ik < table.xis().size(); ++ik) {
        const Vec& x = table.xs()[ix];
        const Vec& xi = table.xis()[ik];
        const auto& n = table.node(it, ix, ik);
        const double w = n.S - x.dot(xi);
        const double first = std::max({std::abs(w), (n.grad_x - xi).norm(), (n.grad_xi - x).norm()});
        e.first_order = std::max(e.first_order, first / std::abs(t));
        e.second_order = std::max(e.second_order, std::abs(w - t * q0(x, xi)) / (t * t));
      }
    }
  }
  return e;
}

Horizon caustic_horizon(const PhaseTable& table) {
  const auto& ts = table.times();
  // (|t|, worst mixed-Hessian deviation, worst flow-Jacobian deviation)
  std::map<double, std::pair<double, double>> by_time;
  for (std::size_t it = 0; it < ts.size(); ++it) {
    auto& [mixed, flow] = by_time[std::abs(ts[it])];
    for (std::size_t ix = 0; ix < table.xs().size(); ++ix) {
      for (std::size_t ik = 0; ik < table.xis().size(); ++ik) {
        const auto& n = table.node(it, ix, ik);
        const int d = static_cast<int>(n.Y.size());
        mixed = std::max(mixed, spectral_norm(n.hess_xxi - Mat::Identity(d, d)));
        flow = std::max(flow, spectral_norm(n.flow_dx - Mat::Identity(d, d)));
      }
    }
  }
  Horizon h;
  for (const auto& [t, dev] : by_time) {
    if (dev.first > 0.5 || dev.second > 0.5) {
      h.binding = dev.first > 0.5 ? "mixed-hessian" : "flow-jacobian";
      if (h.t0 == 0.0 && t > 0.0)
        throw ResolutionError("caustic condition fails at the first nonzero grid time; refine the time grid");
      break;
    }
    h.t0 = t;
  }
  return h;
}

}  // namespace fracwkb
