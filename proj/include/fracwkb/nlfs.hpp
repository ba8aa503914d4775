#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fracwkb/spectral.hpp"

namespace fracwkb {

/// i u_t + Lambda^sigma u = -mu |u|^{nu-1} u (Schrodinger form), or
/// v_tt + Lambda^{2 sigma} v = -mu |v|^{nu-1} v (wave form, with v1 = v_t(0)).
/// mu = 0 switches the nonlinearity off.
struct NlfsProblem {
  NlfsProblem(std::shared_ptr<const SpectralOperator> op, StateField u0);

  double sigma = 2.0;
  double nu = 3.0;
  double mu = 1.0;
  double T = 1.0;   // signed final time
  double dt = 1e-3; // positive step; the last step is shortened to land on T
  int record_every = 1;
  std::shared_ptr<const SpectralOperator> op;
  StateField u0;
  std::optional<StateField> v1;
};

/// Throws InvalidArgument on sigma, nu, mu or dt outside their ranges, or when
/// dt * lambda_max^{sigma/2} >= 0.5.
void validate(const NlfsProblem& prob);

/// True when |u|^{nu-1} u is smooth (nu an odd integer).
bool smooth_nonlinearity(double nu);

struct ConservedQuantities {
  double mass = 0.0;
  double energy = 0.0;
};

/// M = int |u|^2 dvol, E = int 1/2 |Lambda^{sigma/2} u|^2 + mu/(nu+1) |u|^{nu+1} dvol.
ConservedQuantities conserved(const NlfsProblem& prob, const StateField& u);

/// int 1/2 |v_t|^2 + 1/2 |Lambda^sigma v|^2 + mu/(nu+1) |v|^{nu+1} dvol; mass is ||v||^2.
ConservedQuantities conserved_wave(const NlfsProblem& prob, const StateField& v, const StateField& vt);

struct Monitor {
  double t = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  double sup = 0.0;
  double sobolev = 0.0;  // H^{sigma/2} norm
};

struct NlfsTrajectory {
  std::vector<double> times;
  std::vector<StateField> states;
  std::vector<StateField> velocities;  // wave form only
  std::vector<Monitor> monitors;
  std::vector<std::string> warnings;

  double max_mass_drift() const;
  double max_energy_drift() const;
};

/// Strang splitting: half nonlinear phase step u exp(i mu |u|^{nu-1} dt/2),
/// exact linear step, half nonlinear step. Throws BlowUp on non-finite values
/// or sup-norm growth past 1e6 times the initial sup-norm.
NlfsTrajectory solve_nlfs(const NlfsProblem& prob);

struct PicardReport {
  std::vector<double> differences;  // sup_t ||u^{k+1}(t) - u^k(t)|| for k = 0, 1, ...
  std::vector<double> ratios;       // differences[k] / differences[k-1]
  bool converged = false;
  int iterations = 0;
};

struct PicardResult {
  NlfsTrajectory trajectory;
  PicardReport report;
};

struct PicardOptions {
  int max_iterations = 50;
  double tolerance = 1e-14;  // stop once a difference falls below tolerance * sup ||u||
  int warmup = 2;            // ratios from this index on must stay below one
};

/// Iterates u -> exp(i t Lambda^sigma) u0 + i mu int_0^t exp(i (t-s) Lambda^sigma) |u|^{nu-1} u ds
/// on the time grid of step dt over [0, T], trapezoid in s, starting from
/// the free evolution. Throws ContractionFailure when a ratio after warm-up is >= 1.
PicardResult picard_iterate(const NlfsProblem& prob, const PicardOptions& opts = {});

/// Wave form: exact cos/sin flow with sin(t w)/w -> t on the kernel, nonlinear
/// kicks v_t -= mu |v|^{nu-1} v dt/2 on either side (Strang).
/// With mu = 0 the exact propagator is evaluated at each recorded time.
NlfsTrajectory solve_nlfw(const NlfsProblem& prob);

struct ContinuationStep {
  double t_start = 0.0;
  double length = 0.0;
  double sobolev_start = 0.0;
  double ratio = 0.0;  // measured first contraction ratio of the local solve
};

struct ContinuationResult {
  NlfsTrajectory trajectory;
  std::vector<ContinuationStep> steps;
  double bound = 0.0;  // sqrt(C (2 E(u0) + M(u0))), C = max(1, 2^{sigma/2 - 1})
  bool within_bound() const;
};

struct ContinuationOptions {
  double initial_length = 1.0;
  double contraction_target = 0.5;  // local length halves until the first ratio is at most this
  double min_length = 1e-6;
  PicardOptions picard;
};

/// Defocusing (mu = +1) only: local Picard solves of length chosen from the
/// measured contraction ratio, each restarted from the previous endpoint, up
/// to T_total. The local length is reset from the H^{sigma/2} norm at each restart.
ContinuationResult global_continuation(const NlfsProblem& prob, double T_total,
                                       const ContinuationOptions& opts = {});

}  // namespace fracwkb
