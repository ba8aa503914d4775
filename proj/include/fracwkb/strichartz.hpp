#pragma once

#include <limits>
#include <vector>

#include "fracwkb/fit.hpp"
#include "fracwkb/spectral.hpp"

namespace fracwkb {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct AdmissiblePair {
  double p = 2.0, q = 2.0;
  int d = 1;
  double sigma = 2.0;
  bool valid = false;
  double gamma = 0.0;  // d/2 - d/q - sigma/p
  double loss = 0.0;   // (sigma - 1)/p for sigma > 1, else 0
  /// gamma + loss for sigma > 1, evaluated as d/2 - d/q - 1/p; gamma otherwise.
  double total = 0.0;
};

/// Fractional admissibility: p in [2, inf], q in [2, inf), (p, q, d) != (2, inf, 2)
/// and 2/p + d/q <= d/2. Pass kInf for an infinite exponent.
AdmissiblePair classify_pair(double p, double q, int d, double sigma);

/// Number of intervals of length 2 h^{sigma - 1} needed to cover I; sigma > 1.
long tile_interval(const Interval& I, double h, double sigma);

struct ScalingOptions {
  double box_length = 4 * kPi;
  /// Packet width and carrier in units of h: width w h, frequency k0 / h.
  double packet_width = 1.0;
  double carrier = 1.0;
  /// Time grid: geometric from `first_step` (in units of the natural time
  /// scale) with ratio `growth`, steps capped at `max_steps` over the window.
  double first_step = 0.125;
  double growth = 1.04;
  int max_steps = 2000;
  /// Largest grid allowed before the sweep reports a resolution error.
  int max_points = 1 << 16;
};

struct ScalingSample {
  double h = 0.0;
  int points = 0;
  int times = 0;
  double ratio = 0.0;  // ||e^{...} u0||_{L^p L^q} / ||u0||_2
};

struct ScalingStudy {
  std::vector<ScalingSample> samples;
  LinearFit fit;          // log ratio against log h
  double bound = 0.0;     // the exponent the slope is compared with (a negative number)
  double margin = 0.1;
  bool passes() const { return fit.slope >= bound - margin; }
};

/// Sample times in [0, end]: geometric from first with the given ratio,
/// then uniform once the geometric step exceeds end / max_steps.
std::vector<double> graded_times(double first, double end, double growth, int max_steps);

/// L^p in time (trapezoid, p = inf takes the max) of precomputed spatial norms.
double time_norm(const std::vector<double>& times, const std::vector<double>& spatial, double p);

/// Frequency-localized Gaussian used by the sweeps: packet of width w h at
/// frequency k0 / h, then phi(h^2 P).
StateField localized_packet(const PeriodicGrid& grid, const CutoffFunction& cut, double h,
                            const ScalingOptions& opts = {});

/// Smallest power-of-two grid resolving the cutoff's support at scale h.
int scaling_points(const CutoffFunction& cut, double h, double box_length, int max_points);

/// ||exp(i t h^{-1} (h Lambda)^sigma) u0||_{L^p([-t0, t0], L^q)} / ||u0|| over the
/// h sweep on the flat box; bound -(d/2 - d/q - 1/p).
ScalingStudy measure_semiclassical_scaling(double sigma, const AdmissiblePair& pair, const CutoffFunction& cut,
                                           const std::vector<double>& hs, double t0,
                                           const ScalingOptions& opts = {});

/// ||exp(i t Lambda^sigma) u0||_{L^p(I, L^q)} / ||u0||; bound -(gamma + loss).
ScalingStudy measure_unscaled_scaling(double sigma, const AdmissiblePair& pair, const CutoffFunction& cut,
                                      const std::vector<double>& hs, const Interval& I,
                                      const ScalingOptions& opts = {});

struct ScalingIdentity {
  double unscaled = 0.0;      // ||exp(i t Lambda^sigma) v||_{L^p(h^{sigma-1}[-t0, t0], L^q)}
  double semiclassical = 0.0; // h^{(sigma-1)/p} ||exp(i t h^{-1} (h Lambda)^sigma) v||_{L^p([-t0, t0], L^q)}
  double relative_gap() const { return std::abs(unscaled - semiclassical) / std::abs(semiclassical); }
};

/// Both sides of the time-rescaling identity, each evaluated on its own
/// time grid (`times` in [-t0, t0], mapped by h^{sigma-1} for the left side).
ScalingIdentity scaling_identity(const StateField& v, const SpectralOperator& op, double sigma, double h, double p,
                                 double q, const std::vector<double>& times);

}  // namespace fracwkb
