#include "fracwkb/nlfs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fracwkb/error.hpp"

namespace fracwkb {

namespace {

constexpr double kBlowUpGrowth = 1e6;

// Positive power of |u| times u, pointwise.
CVector nonlinearity(const CVector& u, double nu) {
  CVector out(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) out(i) = std::pow(std::abs(u(i)), nu - 1.0) * u(i);
  return out;
}

double weighted_power(const SpectralOperator& op, const StateField& u, double power) {
  const auto& w = op.weight();
  double s = 0.0;
  for (Eigen::Index i = 0; i < u.values().size(); ++i) s += w(i) * std::pow(std::abs(u.values()(i)), power);
  return s * op.grid().cell_volume();
}

std::vector<double> frequencies(const SpectralOperator& op, double sigma) {
  const auto& ev = op.eigenvalues();
  std::vector<double> w(ev.size());
  for (Eigen::Index j = 0; j < ev.size(); ++j) w[j] = std::pow(std::max(ev(j), 0.0), 0.5 * sigma);
  return w;
}

// Eigenvalues below this are treated as exact zeros of P.
double kernel_threshold(const SpectralOperator& op) { return 1e-8 * op.eigenvalues().maxCoeff(); }

struct Steps {
  int count = 0;
  double tau = 0.0;
};

Steps steps_for(double T, double dt) {
  Steps s;
  if (T == 0.0) return s;
  s.count = static_cast<int>(std::ceil(std::abs(T) / dt * (1.0 - 1e-12)));
  s.tau = T / s.count;
  return s;
}

void check_finite(const StateField& u, double sup0, double t) {
  const double sup = u.sup_norm();
  if (!std::isfinite(sup)) throw BlowUp("non-finite values in the solution", t);
  if (sup0 > 0.0 && sup > kBlowUpGrowth * sup0) throw BlowUp("sup-norm grew past 1e6 times its initial value", t);
}

Monitor monitor(const NlfsProblem& prob, double t, const StateField& u, const StateField* vt) {
  Monitor m;
  m.t = t;
  const auto q = vt ? conserved_wave(prob, u, *vt) : conserved(prob, u);
  m.mass = q.mass;
  m.energy = q.energy;
  m.sup = u.sup_norm();
  m.sobolev = sobolev_norm(u, 0.5 * prob.sigma, *prob.op);
  return m;
}

void record(NlfsTrajectory& tr, const NlfsProblem& prob, double t, const StateField& u, const StateField* vt) {
  tr.times.push_back(t);
  tr.states.push_back(u);
  if (vt) tr.velocities.push_back(*vt);
  tr.monitors.push_back(monitor(prob, t, u, vt));
}

std::vector<std::string> warnings_for(const NlfsProblem& prob) {
  std::vector<std::string> w;
  if (!smooth_nonlinearity(prob.nu) && prob.mu != 0.0)
    w.push_back("nu is not an odd integer: the nonlinearity has limited smoothness");
  return w;
}

double drift(const std::vector<Monitor>& ms, double Monitor::*field) {
  double worst = 0.0;
  for (const auto& m : ms) worst = std::max(worst, std::abs(m.*field - ms.front().*field));
  return worst;
}

}  // namespace

NlfsProblem::NlfsProblem(std::shared_ptr<const SpectralOperator> op_, StateField u0_)
    : op(std::move(op_)), u0(std::move(u0_)) {}

bool smooth_nonlinearity(double nu) {
  return nu == std::floor(nu) && static_cast<long>(nu) % 2 == 1;
}

void validate(const NlfsProblem& prob) {
  if (!prob.op) throw InvalidArgument("problem has no spectral operator");
  if (!(prob.u0.grid() == prob.op->grid())) throw InvalidArgument("initial state and operator grids differ");
  if (prob.v1 && !(prob.v1->grid() == prob.op->grid())) throw InvalidArgument("initial velocity grid differs");
  if (!(prob.sigma > 0.0) || prob.sigma == 1.0 || !std::isfinite(prob.sigma))
    throw InvalidArgument("sigma must lie in (0, inf) minus {1}");
  if (!(prob.nu > 1.0) || !std::isfinite(prob.nu)) throw InvalidArgument("nu must be greater than 1");
  if (!std::isfinite(prob.mu)) throw InvalidArgument("mu must be finite");
  if (!std::isfinite(prob.T)) throw InvalidArgument("final time must be finite");
  if (!(prob.dt > 0.0)) throw InvalidArgument("dt must be positive");
  if (prob.record_every < 1) throw InvalidArgument("record_every must be at least 1");
  const double w_max = std::pow(std::max(prob.op->eigenvalues().maxCoeff(), 0.0), 0.5 * prob.sigma);
  if (!(prob.dt * w_max < 0.5))
    throw InvalidArgument("dt * lambda_max^{sigma/2} = " + std::to_string(prob.dt * w_max) +
                          " must stay below 0.5");
}

ConservedQuantities conserved(const NlfsProblem& prob, const StateField& u) {
  const CVector c = prob.op->coefficients(u);
  const auto& ev = prob.op->eigenvalues();
  ConservedQuantities q;
  double kinetic = 0.0;
  for (Eigen::Index j = 0; j < c.size(); ++j) {
    q.mass += std::norm(c(j));
    kinetic += std::pow(std::max(ev(j), 0.0), 0.5 * prob.sigma) * std::norm(c(j));
  }
  q.energy = 0.5 * kinetic;
  if (prob.mu != 0.0) q.energy += prob.mu / (prob.nu + 1.0) * weighted_power(*prob.op, u, prob.nu + 1.0);
  return q;
}

ConservedQuantities conserved_wave(const NlfsProblem& prob, const StateField& v, const StateField& vt) {
  const CVector c = prob.op->coefficients(v);
  const CVector d = prob.op->coefficients(vt);
  const auto& ev = prob.op->eigenvalues();
  ConservedQuantities q;
  double e = 0.0;
  for (Eigen::Index j = 0; j < c.size(); ++j) {
    q.mass += std::norm(c(j));
    e += std::norm(d(j)) + std::pow(std::max(ev(j), 0.0), prob.sigma) * std::norm(c(j));
  }
  q.energy = 0.5 * e;
  if (prob.mu != 0.0) q.energy += prob.mu / (prob.nu + 1.0) * weighted_power(*prob.op, v, prob.nu + 1.0);
  return q;
}

double NlfsTrajectory::max_mass_drift() const { return drift(monitors, &Monitor::mass); }
double NlfsTrajectory::max_energy_drift() const { return drift(monitors, &Monitor::energy); }

NlfsTrajectory solve_nlfs(const NlfsProblem& prob) {
  validate(prob);
  const auto& op = *prob.op;
  const auto w = frequencies(op, prob.sigma);
  const Steps st = steps_for(prob.T, prob.dt);
  std::vector<Complex> linear(w.size());
  for (std::size_t j = 0; j < w.size(); ++j) linear[j] = std::polar(1.0, st.tau * w[j]);

  auto half_kick = [&](StateField& u) {
    if (prob.mu == 0.0) return;
    auto& v = u.mutable_values();
    for (Eigen::Index i = 0; i < v.size(); ++i)
      v(i) *= std::polar(1.0, 0.5 * prob.mu * std::pow(std::abs(v(i)), prob.nu - 1.0) * st.tau);
  };

  NlfsTrajectory tr;
  tr.warnings = warnings_for(prob);
  StateField u = prob.u0;
  const double sup0 = u.sup_norm();
  record(tr, prob, 0.0, u, nullptr);
  for (int n = 1; n <= st.count; ++n) {
    half_kick(u);
    CVector c = op.coefficients(u);
    for (Eigen::Index j = 0; j < c.size(); ++j) c(j) *= linear[j];
    u = op.synthesize(c);
    half_kick(u);
    const double t = n * st.tau;
    check_finite(u, sup0, (n - 1) * st.tau);
    if (n % prob.record_every == 0 || n == st.count) record(tr, prob, t, u, nullptr);
  }
  return tr;
}

PicardResult picard_iterate(const NlfsProblem& prob, const PicardOptions& opts) {
  validate(prob);
  const auto& op = *prob.op;
  const auto w = frequencies(op, prob.sigma);
  const Steps st = steps_for(prob.T, prob.dt);
  const int m = st.count;
  std::vector<double> times(m + 1);
  for (int k = 0; k <= m; ++k) times[k] = k * st.tau;

  const CVector c0 = op.coefficients(prob.u0);
  auto rotate = [&](const CVector& c, double t) {
    CVector out(c.size());
    for (Eigen::Index j = 0; j < c.size(); ++j) out(j) = c(j) * std::polar(1.0, t * w[j]);
    return out;
  };

  // Iterate 0: the free evolution.
  std::vector<StateField> u;
  u.reserve(m + 1);
  for (int k = 0; k <= m; ++k) u.push_back(op.synthesize(rotate(c0, times[k])));

  PicardResult res;
  auto& rep = res.report;
  const Complex gain(0.0, prob.mu);
  for (int it = 0; it < opts.max_iterations; ++it) {
    std::vector<StateField> next;
    next.reserve(m + 1);
    CVector acc = CVector::Zero(c0.size());
    CVector prev_g;
    double diff = 0.0, size = 0.0;
    for (int k = 0; k <= m; ++k) {
      const CVector g = rotate(op.coefficients(StateField(op.grid(), nonlinearity(u[k].values(), prob.nu))), -times[k]);
      if (k > 0) acc += 0.5 * st.tau * (prev_g + g);
      prev_g = g;
      StateField v = op.synthesize(rotate(c0 + gain * acc, times[k]));
      if (!std::isfinite(v.sup_norm())) throw BlowUp("non-finite Picard iterate", k > 0 ? times[k - 1] : 0.0);
      diff = std::max(diff, op.l2_norm(v - u[k]));
      size = std::max(size, op.l2_norm(v));
      next.push_back(std::move(v));
    }
    u = std::move(next);
    rep.differences.push_back(diff);
    rep.iterations = it + 1;
    const std::size_t n = rep.differences.size();
    if (n >= 2) {
      const double prev = rep.differences[n - 2];
      rep.ratios.push_back(prev > 0.0 ? diff / prev : 0.0);
      const bool above_roundoff = diff > 1e3 * std::numeric_limits<double>::epsilon() * size;
      if (static_cast<int>(rep.ratios.size()) > opts.warmup && rep.ratios.back() >= 1.0 && above_roundoff)
        throw ContractionFailure("Picard ratio " + std::to_string(rep.ratios.back()) + " >= 1 at iteration " +
                                 std::to_string(n) + "; the time window is too long");
    }
    if (diff <= opts.tolerance * std::max(size, 1e-300) || diff == 0.0) {
      rep.converged = true;
      break;
    }
  }

  auto& tr = res.trajectory;
  tr.warnings = warnings_for(prob);
  for (int k = 0; k <= m; ++k)
    if (k % prob.record_every == 0 || k == m) record(tr, prob, times[k], u[k], nullptr);
  return res;
}

NlfsTrajectory solve_nlfw(const NlfsProblem& prob) {
  validate(prob);
  if (!prob.v1) throw InvalidArgument("the wave form needs an initial velocity");
  const auto& op = *prob.op;
  const auto w = frequencies(op, prob.sigma);  // Lambda^sigma = P^{sigma/2}
  const double zero = kernel_threshold(op);
  const Steps st = steps_for(prob.T, prob.dt);
  const std::size_t nm = w.size();
  std::vector<double> cs(nm), sw(nm), wsw(nm);
  for (std::size_t j = 0; j < nm; ++j) {
    if (op.eigenvalues()(j) < zero) {
      cs[j] = 1.0;
      sw[j] = st.tau;
      wsw[j] = 0.0;
    } else {
      cs[j] = std::cos(w[j] * st.tau);
      sw[j] = std::sin(w[j] * st.tau) / w[j];
      wsw[j] = w[j] * std::sin(w[j] * st.tau);
    }
  }

  auto half_kick = [&](const StateField& v, StateField& vt) {
    vt.mutable_values() -= (0.5 * prob.mu * st.tau) * nonlinearity(v.values(), prob.nu);
  };

  NlfsTrajectory tr;
  tr.warnings = warnings_for(prob);
  StateField v = prob.u0, vt = *prob.v1;
  const double sup0 = v.sup_norm();
  record(tr, prob, 0.0, v, &vt);
  if (prob.mu == 0.0) {
    // Linear flow: evaluate the exact propagator at each recorded time.
    const CVector c0 = op.coefficients(prob.u0), d0 = op.coefficients(*prob.v1);
    for (int n = 1; n <= st.count; ++n) {
      if (n % prob.record_every != 0 && n != st.count) continue;
      const double t = n * st.tau;
      CVector c1(c0.size()), d1(d0.size());
      for (Eigen::Index j = 0; j < c0.size(); ++j) {
        if (op.eigenvalues()(j) < zero) {
          c1(j) = c0(j) + t * d0(j);
          d1(j) = d0(j);
        } else {
          const double cw = std::cos(w[j] * t), sn = std::sin(w[j] * t);
          c1(j) = cw * c0(j) + (sn / w[j]) * d0(j);
          d1(j) = -w[j] * sn * c0(j) + cw * d0(j);
        }
      }
      v = op.synthesize(c1);
      vt = op.synthesize(d1);
      check_finite(v, sup0, t);
      record(tr, prob, t, v, &vt);
    }
    return tr;
  }
  for (int n = 1; n <= st.count; ++n) {
    half_kick(v, vt);
    const CVector c = op.coefficients(v), d = op.coefficients(vt);
    CVector c1(c.size()), d1(d.size());
    for (Eigen::Index j = 0; j < c.size(); ++j) {
      c1(j) = cs[j] * c(j) + sw[j] * d(j);
      d1(j) = -wsw[j] * c(j) + cs[j] * d(j);
    }
    v = op.synthesize(c1);
    vt = op.synthesize(d1);
    half_kick(v, vt);
    check_finite(v, sup0, (n - 1) * st.tau);
    if (n % prob.record_every == 0 || n == st.count) record(tr, prob, n * st.tau, v, &vt);
  }
  return tr;
}

bool ContinuationResult::within_bound() const {
  for (const auto& m : trajectory.monitors)
    if (m.sobolev > bound) return false;
  return true;
}

ContinuationResult global_continuation(const NlfsProblem& prob, double T_total, const ContinuationOptions& opts) {
  validate(prob);
  if (prob.mu != 1.0) throw InvalidArgument("global continuation needs the defocusing sign mu = +1");
  if (!(T_total >= 0.0) || !std::isfinite(T_total)) throw InvalidArgument("total time must be nonnegative");

  ContinuationResult res;
  const auto q0 = conserved(prob, prob.u0);
  res.bound = std::sqrt(std::max(1.0, std::pow(2.0, 0.5 * prob.sigma - 1.0)) * (2.0 * q0.energy + q0.mass));

  auto& tr = res.trajectory;
  tr.warnings = warnings_for(prob);
  record(tr, prob, 0.0, prob.u0, nullptr);
  NlfsProblem local = prob;
  double t = 0.0;
  while (t < T_total * (1.0 - 1e-12)) {
    ContinuationStep step;
    step.t_start = t;
    step.sobolev_start = tr.monitors.back().sobolev;
    double length = std::min(opts.initial_length, T_total - t);
    PicardResult pr;
    while (true) {
      if (length < opts.min_length)
        throw ContractionFailure("no contracting local window at t = " + std::to_string(t));
      local.T = length;
      try {
        pr = picard_iterate(local, opts.picard);
      } catch (const ContractionFailure&) {
        length *= 0.5;
        continue;
      }
      const double first = pr.report.ratios.empty() ? 0.0 : pr.report.ratios.front();
      if (first <= opts.contraction_target && pr.report.converged) {
        step.ratio = first;
        break;
      }
      length *= 0.5;
    }
    step.length = length;
    res.steps.push_back(step);
    const auto& seg = pr.trajectory;
    for (std::size_t k = 1; k < seg.times.size(); ++k) {
      tr.times.push_back(t + seg.times[k]);
      tr.states.push_back(seg.states[k]);
      Monitor m = seg.monitors[k];
      m.t += t;
      tr.monitors.push_back(m);
    }
    local.u0 = seg.states.back();
    t += length;
  }
  return res;
}

}  // namespace fracwkb
