#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "fracwkb/metric.hpp"
#include "fracwkb/symbols.hpp"
#include "fracwkb/types.hpp"

namespace fracwkb {

using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Uniform periodic grid on [-L/2, L/2)^d with n points per axis, stored
/// row-major (last axis fastest).
class PeriodicGrid {
 public:
  PeriodicGrid(int dim, int n, double box_length);

  int dim() const { return dim_; }
  int n() const { return n_; }
  double box_length() const { return L_; }
  std::size_t size() const { return size_; }
  double spacing() const { return L_ / n_; }
  double cell_volume() const { return std::pow(spacing(), dim_); }

  /// Position of flat index i.
  Vec point(std::size_t i) const;
  /// Coordinate of index j along one axis.
  double coordinate(int j) const { return -0.5 * L_ + L_ * j / n_; }
  /// Signed wavenumber of index j along one axis (2 pi / L times the signed mode number).
  double wavenumber(int j) const;
  Vec wavevector(std::size_t i) const;
  /// |k|^2 for each flat Fourier index.
  const std::vector<double>& k_squared() const { return k2_; }
  /// Largest resolved |k| along one axis.
  double nyquist() const { return kPi * n_ / L_; }

  bool operator==(const PeriodicGrid& o) const { return dim_ == o.dim_ && n_ == o.n_ && L_ == o.L_; }

 private:
  int dim_, n_;
  double L_;
  std::size_t size_;
  std::vector<double> k2_;
};

/// Complex field sampled on a periodic grid. Fourier coefficients are taken
/// against the true positions: u(x) = sum_k c_k exp(i k.x).
class StateField {
 public:
  explicit StateField(PeriodicGrid grid);
  StateField(PeriodicGrid grid, CVector values);
  static StateField from_fourier(PeriodicGrid grid, const CVector& coefficients);

  const PeriodicGrid& grid() const { return grid_; }
  const CVector& values() const { return values_; }
  /// Mutable access drops the cached coefficients.
  CVector& mutable_values();
  const CVector& fourier() const;

  /// Plain L2 norm with cell weight.
  double l2_norm() const;
  double sup_norm() const;

  StateField& operator+=(const StateField& o);
  StateField& operator-=(const StateField& o);
  StateField& operator*=(Complex s);
  friend StateField operator+(StateField a, const StateField& b) { return a += b; }
  friend StateField operator-(StateField a, const StateField& b) { return a -= b; }
  friend StateField operator*(Complex s, StateField a) { return a *= s; }

 private:
  PeriodicGrid grid_;
  CVector values_;
  mutable std::optional<CVector> fourier_;
};

/// Forward and inverse unnormalized DFTs over the grid axes (FFTW).
CVector fft_forward(const PeriodicGrid& grid, const CVector& in);
CVector fft_inverse(const PeriodicGrid& grid, const CVector& in);

/// P = -Delta_g realized either as the flat Fourier multiplier |k|^2 or
/// through eigenpairs of a one-dimensional discretization.
class SpectralOperator {
 public:
  enum class Kind { flat, eig };

  static SpectralOperator flat(const PeriodicGrid& grid);
  /// Eigenvalues (sorted, nonnegative) and eigenvectors of P, orthonormal in
  /// sum_i weight_i conj(e_j(x_i)) e_k(x_i) dx.
  static SpectralOperator eig(const PeriodicGrid& grid, RVector eigenvalues, Eigen::MatrixXd eigenvectors,
                              RVector weight);

  Kind kind() const { return kind_; }
  const PeriodicGrid& grid() const { return grid_; }
  /// flat: |k|^2 per Fourier index; eig: sorted eigenvalues.
  const RVector& eigenvalues() const { return eigenvalues_; }
  const Eigen::MatrixXd& eigenvectors() const { return eigenvectors_; }
  /// Volume density on the grid (ones for flat).
  const RVector& weight() const { return weight_; }

  /// Coefficients of u in the operator's eigenbasis, normalized so that
  /// sum |c_j|^2 equals the squared dvol_g norm.
  CVector coefficients(const StateField& u) const;
  StateField synthesize(const CVector& c) const;

  /// f(P) u.
  StateField apply(const std::function<Complex(double)>& f, const StateField& u) const;

  /// ||u||_{L2(dvol_g)}.
  double l2_norm(const StateField& u) const;

 private:
  SpectralOperator(Kind kind, PeriodicGrid grid) : kind_(kind), grid_(std::move(grid)) {}
  Kind kind_;
  PeriodicGrid grid_;
  RVector eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
  RVector weight_;
};

/// exp(i t Lambda^sigma) u, or exp(i t h^{-1} (h Lambda)^sigma) u when h is given.
StateField propagate(const StateField& u0, const SpectralOperator& op, double sigma, double t,
                     std::optional<double> h = std::nullopt);

/// phi(h^2 P) u.
StateField frequency_localize(const StateField& u0, const SpectralOperator& op,
                              const CutoffFunction& cut, double h);

/// (sum (1 + lambda)^gamma |c|^2)^{1/2}.
double sobolev_norm(const StateField& u, double gamma, const SpectralOperator& op);

struct Trajectory {
  std::vector<double> times;
  std::vector<StateField> states;
};

/// Space-time norm: L^q in space by Riemann sum with cell weight, L^p in time
/// by the composite trapezoid rule (p = infinity takes the maximum).
double lp_lq_norm(const Trajectory& traj, double p, double q);
double lq_norm(const StateField& u, double q);

/// Assembles P = -|g|^{-1} d(g^{11} |g| d) on n (odd) points with Fourier
/// differentiation, symmetrizes with the volume weight and diagonalizes.
SpectralOperator discretize_P_1d(const MetricField& m, int n_points);

/// Orthogonal projection onto the numerical kernel of P (eigenvalues below
/// 1e-8 * lambda_max). Throws SpectralGapError if the kernel is empty or not
/// separated from the rest of the spectrum by a factor 100.
StateField kernel_projection(const SpectralOperator& op, const StateField& u);
std::size_t kernel_dimension(const SpectralOperator& op);

/// phi0(P) u + sum_{k=1}^{k_max} phi(4^{-k} P) u.
StateField littlewood_paley_reconstruct(const StateField& u, const SpectralOperator& op,
                                        const LittlewoodPaley& lp);

/// sum_k ||phi(4^{-k} P) u||^2 / ||u||^2 (including the phi0 block).
double almost_orthogonality_ratio(const StateField& u, const SpectralOperator& op,
                                  const LittlewoodPaley& lp);

/// Exact L2 -> L-infinity norm of phi(h^2 P) for the flat operator:
/// sqrt(sum_k phi(h^2 |k|^2)^2) / L^{d/2}.
double bernstein_norm(const SpectralOperator& op, const CutoffFunction& cut, double h);

/// exp(-|x - x0|^2 / (2 w^2)) exp(i k0 . x).
StateField gaussian_packet(const PeriodicGrid& grid, const Vec& center, double width, const Vec& k0);

/// Random Fourier coefficients (complex Gaussian) on |k| <= k_max, zero elsewhere.
StateField random_band_limited(const PeriodicGrid& grid, double k_max, std::mt19937_64& rng);

}  // namespace fracwkb
