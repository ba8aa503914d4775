#include "fracwkb/hamflow.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/SVD>

#include "fracwkb/error.hpp"

namespace fracwkb {

namespace {

struct Aug {
  Vec X, Xi;
  PhaseMat Z;
  double action = 0.0;
  Complex f{};
};

Aug axpy(const Aug& a, double s, const Aug& b) {
  Aug r;
  r.X = a.X + s * b.X;
  r.Xi = a.Xi + s * b.Xi;
  r.Z = a.Z + s * b.Z;
  r.action = a.action + s * b.action;
  r.f = a.f + s * b.f;
  return r;
}

Aug rhs(const RealSymbol& H, const Aug& u, const FlowExtras& ex) {
  const int d = static_cast<int>(u.X.size());
  const auto j = H.jet(u.X, u.Xi);
  Aug k;
  k.X = j.grad_xi;
  k.Xi = -j.grad_x;
  if (ex.jacobian || ex.transport) {
    PhaseMat A(2 * d, 2 * d);
    A.topLeftCorner(d, d) = j.hess_xxi.transpose();
    A.topRightCorner(d, d) = j.hess_xixi;
    A.bottomLeftCorner(d, d) = -j.hess_xx;
    A.bottomRightCorner(d, d) = -j.hess_xxi;
    k.Z = A * u.Z;
  } else {
    k.Z = u.Z;  // empty
  }
  if (ex.action) k.action = u.Xi.dot(j.grad_xi) - j.value;
  if (ex.transport) {
    const Mat Xy = u.Z.topLeftCorner(d, d);
    const Mat Xiy = u.Z.bottomLeftCorner(d, d);
    const Mat hess_S = Xiy * Xy.inverse();
    // q0 = -H
    double f = -0.5 * (j.hess_xixi * hess_S).trace();
    k.f = f;
    if (ex.q1 != nullptr) k.f += Complex(0.0, 1.0) * (*ex.q1)(u.X, u.Xi);
  }
  return k;
}

void check_guard(const Aug& u, const GuardBand& g, double t) {
  const double n = u.Xi.norm();
  if (!(n >= g.min_norm && n <= g.max_norm)) {
    std::ostringstream os;
    os << "trajectory left the frequency guard band: |Xi| = " << n << " at t = " << t
       << " (band [" << g.min_norm << ", " << g.max_norm << "])";
    throw GuardBandError(os.str());
  }
}

void advance(const RealSymbol& H, Aug& u, double t_from, double t_to, const FlowOptions& opts,
             const FlowExtras& ex) {
  if (!(opts.dt > 0.0)) throw InvalidArgument("flow step must be positive");
  const double span = t_to - t_from;
  if (span == 0.0) return;
  const int n = std::max(1, static_cast<int>(std::ceil(std::abs(span) / opts.dt - 1e-9)));
  const double h = span / n;
  for (int i = 0; i < n; ++i) {
    const Aug k1 = rhs(H, u, ex);
    const Aug k2 = rhs(H, axpy(u, 0.5 * h, k1), ex);
    const Aug k3 = rhs(H, axpy(u, 0.5 * h, k2), ex);
    const Aug k4 = rhs(H, axpy(u, h, k3), ex);
    u.X += h / 6.0 * (k1.X + 2.0 * k2.X + 2.0 * k3.X + k4.X);
    u.Xi += h / 6.0 * (k1.Xi + 2.0 * k2.Xi + 2.0 * k3.Xi + k4.Xi);
    u.Z += h / 6.0 * (k1.Z + 2.0 * k2.Z + 2.0 * k3.Z + k4.Z);
    u.action += h / 6.0 * (k1.action + 2.0 * k2.action + 2.0 * k3.action + k4.action);
    u.f += h / 6.0 * (k1.f + 2.0 * k2.f + 2.0 * k3.f + k4.f);
    if (!u.X.allFinite() || !u.Xi.allFinite()) throw GuardBandError("flow produced non-finite values");
    check_guard(u, opts.guard, t_from + (i + 1) * h);
  }
}

Aug initial(const Vec& x, const Vec& xi, const FlowExtras& ex) {
  if (x.size() != xi.size() || x.size() < 1 || x.size() > kMaxDim)
    throw InvalidArgument("flow needs x and xi of equal dimension in [1, 3]");
  if (!x.allFinite() || !xi.allFinite()) throw InvalidArgument("flow start must be finite");
  Aug u;
  u.X = x;
  u.Xi = xi;
  const int d = static_cast<int>(x.size());
  if (ex.jacobian || ex.transport)
    u.Z = PhaseMat::Identity(2 * d, 2 * d);
  else
    u.Z.resize(0, 0);
  return u;
}

FlowState to_state(const Aug& u) {
  FlowState s;
  s.X = u.X;
  s.Xi = u.Xi;
  s.Z = u.Z;
  s.action = u.action;
  s.log_amplitude = u.f;
  return s;
}

}  // namespace

FlowState integrate_characteristic(const RealSymbol& H, double t, const Vec& x, const Vec& xi,
                                   const FlowOptions& opts, const FlowExtras& extras) {
  if (!std::isfinite(t)) throw InvalidArgument("flow time must be finite");
  Aug u = initial(x, xi, extras);
  check_guard(u, opts.guard, 0.0);
  advance(H, u, 0.0, t, opts, extras);
  return to_state(u);
}

FlowPoint integrate_flow(const RealSymbol& H, double t, const Vec& x, const Vec& xi,
                         const FlowOptions& opts) {
  const FlowState s = integrate_characteristic(H, t, x, xi, opts, {});
  return {s.X, s.Xi};
}

PhaseMat variational_jacobian(const RealSymbol& H, double t, const Vec& x, const Vec& xi,
                              const FlowOptions& opts) {
  FlowExtras ex;
  ex.jacobian = true;
  return integrate_characteristic(H, t, x, xi, opts, ex).Z;
}

InverseResult inverse_map(const RealSymbol& H, double t, const Vec& x, const Vec& xi,
                          const FlowOptions& opts, const InverseOptions& inv,
                          const FlowExtras& extras) {
  FlowExtras ex = extras;
  ex.jacobian = true;
  const int d = static_cast<int>(x.size());
  const double tol = inv.tol * std::max(1.0, x.norm());

  InverseResult out;
  out.Y = inv.start.size() == x.size() ? inv.start : x;
  out.state = integrate_characteristic(H, t, out.Y, xi, opts, ex);
  double res = (out.state.X - x).norm();
  int iterations = 0;
  while (res > tol) {
    if (iterations >= inv.max_iterations) break;
    const Mat Xy = out.state.Z.topLeftCorner(d, d);
    const Vec delta = Xy.partialPivLu().solve(out.state.X - x);
    if (!delta.allFinite()) break;
    double step = 1.0;
    bool accepted = false;
    while (iterations < inv.max_iterations) {
      ++iterations;
      const Vec trial = out.Y - step * delta;
      FlowState s = integrate_characteristic(H, t, trial, xi, opts, ex);
      const double r = (s.X - x).norm();
      if (r < res || r <= tol) {
        out.Y = trial;
        out.state = std::move(s);
        res = r;
        accepted = true;
        break;
      }
      step *= inv.damping;
    }
    if (!accepted) break;
  }
  out.iterations = iterations;
  if (res > tol) {
    std::ostringstream os;
    os << "inverse map did not converge at t = " << t << ", x[0] = " << x(0) << ", xi[0] = " << xi(0)
       << " (residual " << res << " after " << iterations << " iterations)";
    throw CausticError(os.str());
  }
  return out;
}

FlowTable build_flow_table(const RealSymbol& H, std::vector<double> times, std::vector<Vec> xs,
                           std::vector<Vec> xis, const FlowOptions& opts) {
  if (times.empty() || xs.empty() || xis.empty()) throw InvalidArgument("flow table grids must be nonempty");
  if (!std::is_sorted(times.begin(), times.end()))
    throw InvalidArgument("flow table times must be increasing");
  FlowTable table(std::move(times), std::move(xs), std::move(xis));
  const auto& ts = table.times();
  FlowExtras ex;
  ex.jacobian = true;

  // Positive times march forward from 0, negative ones backward.
  std::vector<std::size_t> forward, backward;
  for (std::size_t i = 0; i < ts.size(); ++i) (ts[i] >= 0.0 ? forward : backward).push_back(i);
  std::reverse(backward.begin(), backward.end());

  for (std::size_t ix = 0; ix < table.xs().size(); ++ix) {
    for (std::size_t ik = 0; ik < table.xis().size(); ++ik) {
      const Vec& x = table.xs()[ix];
      const Vec& xi = table.xis()[ik];
      const double h0 = H(x, xi);
      for (const auto* order : {&forward, &backward}) {
        Aug u = initial(x, xi, ex);
        check_guard(u, opts.guard, 0.0);
        double t_prev = 0.0;
        for (std::size_t it : *order) {
          advance(H, u, t_prev, ts[it], opts, ex);
          t_prev = ts[it];
          auto& node = table.node(it, ix, ik);
          node.X = u.X;
          node.Xi = u.Xi;
          node.Z = u.Z;
          node.energy_error = std::abs(H(u.X, u.Xi) - h0);
        }
      }
    }
  }
  return table;
}

FlowBounds fit_flow_bounds(const FlowTable& table) {
  FlowBounds b;
  const auto& ts = table.times();
  const std::size_t nx = table.xs().size(), nk = table.xis().size();
  std::vector<std::pair<double, double>> deviation;  // (|t|, max ||X_x - I||)
  for (std::size_t it = 0; it < ts.size(); ++it) {
    const double t = ts[it];
    double dev = 0.0;
    for (std::size_t ix = 0; ix < nx; ++ix) {
      for (std::size_t ik = 0; ik < nk; ++ik) {
        const auto& n = table.node(it, ix, ik);
        const int d = static_cast<int>(n.X.size());
        b.max_energy_error = std::max(b.max_energy_error, n.energy_error);
        const PhaseMat D = n.Z - PhaseMat::Identity(2 * d, 2 * d);
        const Mat Dx = n.Z.topLeftCorner(d, d) - Mat::Identity(d, d);
        dev = std::max(dev, Eigen::JacobiSVD<Mat>(Dx).singularValues()(0));
        if (t == 0.0) continue;
        const double zn = Eigen::JacobiSVD<PhaseMat>(D).singularValues()(0);
        b.jacobian_constant = std::max(b.jacobian_constant, zn / std::abs(t));
        b.inverse_constant =
            std::max(b.inverse_constant, (n.X - table.xs()[ix]).norm() / std::abs(t));
      }
    }
    deviation.emplace_back(std::abs(t), dev);
  }
  std::sort(deviation.begin(), deviation.end());
  for (const auto& [t, dev] : deviation) {
    if (dev > 0.5) break;
    b.horizon = t;
  }
  return b;
}

}  // namespace fracwkb
