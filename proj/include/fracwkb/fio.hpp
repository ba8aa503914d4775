#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "fracwkb/fit.hpp"
#include "fracwkb/hamjac.hpp"
#include "fracwkb/spectral.hpp"
#include "fracwkb/transport.hpp"

namespace fracwkb {

struct FioOptions {
  /// |xi| range containing the xi-support of every amplitude used with the phase.
  Interval band{0.5, 2.0};
  /// Chebyshev nodes per sign of xi.
  int chebyshev_nodes = 24;
  /// Odd number of periodic x-samples of the phase; ignored (one sample)
  /// when q0 does not depend on x.
  int coarse_points = 65;
  /// Floor on trapezoid nodes per sign of xi in kernel quadrature.
  int min_kernel_nodes = 512;
  PhaseOptions phase;
};

/// The phase at one time, sampled on a coarse periodic x-grid times
/// Chebyshev nodes in +-band and interpolated from there (trigonometric in x,
/// barycentric in xi). One-dimensional.
class SampledPhase {
 public:
  struct Slice;

  SampledPhase(const RealSymbol& q0, double t, double box_length, const FioOptions& opts = {});

  double time() const { return t_; }
  double box_length() const { return L_; }
  const Interval& band() const { return band_; }
  /// The underlying phase table (single time, coarse x, Chebyshev xi).
  const PhaseTable& table() const { return table_; }
  /// max |Y - x| over the samples.
  double max_displacement() const { return max_disp_; }
  int min_kernel_nodes() const { return min_kernel_nodes_; }

  /// Phase data at arbitrary x for every Chebyshev node.
  Slice slice(double x) const;
  /// Barycentric interpolation of a slice in xi; |xi| must lie in the band.
  PhasePoint interpolate(const Slice& s, double x, double xi) const;
  PhasePoint at(double x, double xi) const { return interpolate(slice(x), x, xi); }
  /// Phase data at every point of `grid` for one xi.
  void column(const PeriodicGrid& grid, double xi, std::vector<PhasePoint>& out) const;

  struct Slice {
    std::vector<Complex> wd, gh, f;  // W + iD, grad_x + i hess_xx, log amplitude; per node
  };

 private:
  std::vector<double> barycentric(double xi, int& band_index) const;

  double t_, L_;
  Interval band_;
  int nc_, nx_;
  int min_kernel_nodes_;
  std::vector<double> nodes_;    // Chebyshev nodes in [-1, 1]
  std::vector<double> weights_;  // barycentric weights
  PhaseTable table_;
  // Per (band, node): samples over coarse x and their Fourier coefficients.
  std::vector<std::vector<Complex>> wd_, gh_, f_;
  std::vector<std::vector<Complex>> wd_hat_, gh_hat_, f_hat_;
  double max_disp_ = 0.0;
};

/// Smallest grid size whose Nyquist frequency covers 1.25 band.hi / h.
int required_points(const SampledPhase& phase, double h);

/// J_h(S(t), a) u0 with the y-integral taken exactly through the Fourier
/// coefficients of u0 and the xi-integral as the sum over grid modes with
/// |h k| in the band. Modes whose coefficient is below 1e-15 of the largest
/// are skipped. Throws ResolutionError if the grid is too coarse for h (the
/// message names the required point count) or if |Y - x| exceeds L / 8.
StateField apply_fio(const SampledPhase& phase, const AmplitudeFn& amp, const StateField& u0, double h);

/// Kohn-Nirenberg quantization sum_k exp(i k x) a(x, h k) c_k restricted to |h k| in band.
StateField apply_pseudo(const SymbolFunction& a, const StateField& u0, double h, const Interval& band);

/// Dense matrix from in-band Fourier coefficients to grid values.
Eigen::MatrixXcd fio_matrix(const SampledPhase& phase, const AmplitudeFn& amp, const PeriodicGrid& grid, double h);

/// L2 operator norm of J_h by power iteration on the Gram matrix.
double operator_norm(const SampledPhase& phase, const AmplitudeFn& amp, const PeriodicGrid& grid, double h,
                     int iterations = 100, std::uint64_t seed = 7);

struct KernelGrid {
  double h = 0.0;
  double t = 0.0;
  std::vector<double> xs, ys;
  Eigen::MatrixXcd values;  // rows x, columns y
  double sup() const { return values.size() ? values.cwiseAbs().maxCoeff() : 0.0; }
};

/// K_h(t, x, y) = (2 pi h)^{-1} int exp(i (S - y xi) / h) a dxi on a uniform
/// y-grid, trapezoid in xi with at least 8 nodes per 2 pi of phase change.
KernelGrid kernel(const SampledPhase& phase, const AmplitudeFn& amp, double h, const std::vector<double>& xs,
                  double y_lo, double y_hi, int ny);

/// sup over y of |K_h(t, x, y)| on a window around the stationary region,
/// refining the y-grid until the maximum changes by less than 1%.
double kernel_sup(const SampledPhase& phase, const AmplitudeFn& amp, double h, double x);

struct DispersiveSample {
  double t = 0.0;
  double lambda = 0.0;
  double sup_kernel = 0.0;
};

struct DispersiveFit {
  std::vector<DispersiveSample> samples;
  LinearFit fit;  // log sup |K| against log(t / h)
};

/// Kernel sup-norms over the t samples in [h, t0] and their log-log slope.
/// The sup in x is taken over `xs`. Throws InsufficientData with fewer than
/// four valid samples.
DispersiveFit dispersive_fit(const RealSymbol& q0, const RealSymbol& a, double h,
                             const std::vector<double>& t_samples, double t0, double box_length,
                             const FioOptions& opts = {}, const std::vector<double>& xs = {0.0});

/// Stationary-phase size of the flat one-dimensional kernel,
/// max over eta of (2 pi h)^{-1} (2 pi / lambda)^{1/2} |a(eta)| / |q0''(eta)|^{1/2}.
double stationary_phase_peak(const RealSymbol& q0, const RealSymbol& a, double h, double t, const Interval& band,
                             int samples = 4001);

/// 2 sup_band sigma |eta|^{sigma - 1} + 1.
double default_c_large(double sigma, const Interval& band);

/// max |K| over |sqrt(g(x)) (x - y) / t| >= c_large divided by max |K|, on a
/// y-window reaching 1.5 c_large t past x.
double nonstationary_ratio(const SampledPhase& phase, const AmplitudeFn& amp, const MetricField& m, double h,
                           double x, double c_large);

struct StationaryHessian {
  Vec eta;
  Mat hessian;  // sqrt(g) hess_xi S sqrt(g) / t
  double det = 0.0;
  double expected = 0.0;  // sigma^d |sigma - 1| |eta|^{(sigma - 2) d}
  int iterations = 0;
};

/// Finds eta with grad_xi S(t, x, sqrt(g(x)) eta) = y by Newton's method and
/// assembles the Hessian of the rescaled phase there.
StationaryHessian stationary_hessian(const RealSymbol& q0, const MetricField& m, double sigma, double t,
                                     const Vec& x, const Vec& y, const Vec& eta_guess,
                                     const PhaseOptions& opts = {});

struct RemainderSample {
  double h = 0.0;
  int points = 0;
  double ratio = 0.0;  // ||U_h(t) Op_h(a) u - J_N(t) u|| / ||u||
};

struct RemainderFit {
  std::vector<RemainderSample> samples;
  LinearFit fit;  // log ratio against log h
};

/// Test state generator: grid and h to state.
using StateFactory = std::function<StateField(const PeriodicGrid&, double h)>;

/// Remainder of the order-N parametrix against the flat reference
/// exp(i t h^{-1} (h |D|)^sigma) Op_h(a).
RemainderSample remainder_ratio(const RealSymbol& q0, const RealSymbol& a, double sigma, double t, double h,
                                int order, double box_length, const StateFactory& state,
                                const FioOptions& opts = {});

RemainderFit remainder_decay(const RealSymbol& q0, const RealSymbol& a, double sigma, double t,
                             const std::vector<double>& hs, int order, double box_length,
                             const StateFactory& state, const FioOptions& opts = {});

}  // namespace fracwkb
