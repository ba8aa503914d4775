#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fracwkb/types.hpp"

namespace fracwkb {

/// Bounded elliptic inverse metric G(x) = (g^{jk}(x)) on a periodic box
/// [-L/2, L/2)^d standing in for R^d.
///
/// The evaluator returns the partial derivative d^alpha G(x) for a
/// multi-index alpha (alpha.size() == dim); alpha = 0 gives G itself. Test
/// metrics supply closed-form derivatives up to `derivative_order`.
class MetricField {
 public:
  using Evaluator = std::function<Mat(const Vec& x, std::span<const int> alpha)>;

  MetricField(int dim, double box_length, int derivative_order, Evaluator eval,
              std::string name = "custom");

  /// g^{jk} = delta^{jk}.
  static MetricField flat(int dim, double box_length);

  /// G(x) = (1 + epsilon * exp(-|x|^2)) I. In d = 1 this is
  /// g^{11}(x) = 1 + epsilon exp(-x^2).
  static MetricField gaussian_bump(int dim, double box_length, double epsilon);

  int dim() const { return dim_; }
  double box_length() const { return box_length_; }
  int derivative_order() const { return derivative_order_; }
  const std::string& name() const { return name_; }
  bool is_flat() const { return flat_; }

  Mat inverse_metric(const Vec& x) const;
  Mat derivative(const Vec& x, std::span<const int> alpha) const;

  /// sqrt(det g) = det(G)^{-1/2}, the Riemannian volume density.
  double volume_density(const Vec& x) const;

 private:
  int dim_;
  double box_length_;
  int derivative_order_;
  Evaluator eval_;
  std::string name_;
  bool flat_ = false;
};

/// p(x, xi) = xi^T G(x) xi.
double principal_symbol(const MetricField& m, const Vec& x, const Vec& xi);

/// p together with its first and second partial derivatives.
/// hess_xxi(i, j) = d^2 p / dx_i dxi_j.
struct PrincipalJet {
  double value = 0.0;
  Vec grad_x, grad_xi;
  Mat hess_xx, hess_xxi, hess_xixi;
};

PrincipalJet principal_jet(const MetricField& m, const Vec& x, const Vec& xi);

struct AssumptionReport {
  /// Smallest C >= 1 with C^{-1} |xi|^2 <= p(x, xi) <= C |xi|^2 on the samples.
  double ellipticity = 1.0;
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  /// derivative_bounds[k - 1] = max |d^alpha g^{jk}| over |alpha| = k.
  std::vector<double> derivative_bounds;
};

/// Audits ellipticity and derivative bounds on the given sample points.
/// Throws EllipticityViolation if G is not symmetric positive definite at a
/// sample, InvalidArgument if derivative_order < 2.
AssumptionReport audit_assumptions(const MetricField& m, std::span<const Vec> samples);

/// Uniform sample grid over the box, `per_dim` points per axis.
std::vector<Vec> box_samples(const MetricField& m, int per_dim);

/// All multi-indices of total order k in `dim` variables.
std::vector<std::vector<int>> multi_indices(int dim, int k);

}  // namespace fracwkb
