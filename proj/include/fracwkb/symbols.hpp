#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "fracwkb/jet.hpp"
#include "fracwkb/metric.hpp"
#include "fracwkb/types.hpp"

namespace fracwkb {

/// Smooth step on [0, 1]: 0 at u <= 0, 1 at u >= 1, C-infinity, built from
/// glued exponentials exp(-1/u) / (exp(-1/u) + exp(-1/(1-u))).
TaylorJet smooth_step(const TaylorJet& u);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v) const { return v >= lo && v <= hi; }
};

/// Compactly supported smooth bump on (0, inf): zero outside [r1, r2],
/// one on the plateau, glued-exponential ramps in between.
class CutoffFunction {
 public:
  CutoffFunction(double r1, double r2, Interval plateau);

  double operator()(double lambda) const { return jet(lambda, 0).value(); }
  double derivative(double lambda, int order) const { return jet(lambda, order).derivative(order); }
  TaylorJet jet(double lambda, int order) const;
  TaylorJet jet(const TaylorJet& lambda) const;

  Interval support() const { return {r1_, r2_}; }
  Interval plateau() const { return plateau_; }

  /// A cutoff equal to one on [r1 / margin, margin r2], supported in
  /// [r1 / (2 margin), 2 margin r2]. Plays the role of the widened cutoff used
  /// to replace lambda^{sigma/2} by a compactly supported function. A margin
  /// above one keeps variable-metric flows on the plateau.
  CutoffFunction widened(double margin = 1.0) const;

 private:
  double r1_, r2_;
  Interval plateau_;
};

CutoffFunction make_bump(double r1, double r2, Interval plateau);

/// Dyadic resolution of the identity phi0(lambda) + sum_{k>=1} phi(4^{-k} lambda) = 1
/// with phi(lambda) = chi(lambda) - chi(4 lambda) and chi = 1 on [0, 1],
/// chi = 0 on [4, inf).
class LittlewoodPaley {
 public:
  explicit LittlewoodPaley(int k_max);

  int k_max() const { return k_max_; }
  double chi(double lambda) const;
  double phi0(double lambda) const { return chi(lambda); }
  double phi(double lambda) const { return chi(lambda) - chi(4.0 * lambda); }
  /// phi0(lambda) + sum_{k=1}^{k_max} phi(4^{-k} lambda).
  double partial_sum(double lambda) const;
  /// Largest lambda for which the truncated sum is exactly one.
  double exact_range() const;

  struct Check {
    double max_error = 0.0;          // over lambda <= exact_range()
    std::size_t truncated_points = 0;  // lambdas beyond the range with sum < 1
  };
  Check check(const std::vector<double>& lambdas) const;

 private:
  int k_max_;
};

/// psi(lambda) = cutoff(lambda) * lambda^{sigma/2}, the compactly supported
/// stand-in for (h Lambda)^sigma on the cutoff's plateau.
class SemiclassicalPsi {
 public:
  SemiclassicalPsi(CutoffFunction cut, double sigma);

  double sigma() const { return sigma_; }
  const CutoffFunction& cutoff() const { return cut_; }
  double operator()(double lambda) const { return jet(lambda, 0).value(); }
  TaylorJet jet(double lambda, int order) const;

 private:
  CutoffFunction cut_;
  double sigma_;
};

SemiclassicalPsi semiclassical_psi(const CutoffFunction& cut, double sigma);

/// Value, gradients and Hessians of a phase-space symbol at (x, xi).
/// hess_xxi(i, j) = d^2 / dx_i dxi_j.
template <typename Scalar>
struct SymbolJet {
  using V = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
  using M = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
  Scalar value{};
  V grad_x, grad_xi;
  M hess_xx, hess_xxi, hess_xixi;

  static SymbolJet zero(int d) {
    SymbolJet j;
    j.value = Scalar{};
    j.grad_x = V::Zero(d);
    j.grad_xi = V::Zero(d);
    j.hess_xx = M::Zero(d, d);
    j.hess_xxi = M::Zero(d, d);
    j.hess_xixi = M::Zero(d, d);
    return j;
  }
};

/// A smooth symbol on phase space with second-order derivative access.
/// `x_independent` lets downstream code recognise flat-space symbols.
template <typename Scalar>
class BasicSymbol {
 public:
  using Jet = SymbolJet<Scalar>;
  using Fn = std::function<Jet(const Vec& x, const Vec& xi)>;

  BasicSymbol() = default;
  BasicSymbol(int dim, Fn fn, bool x_independent = false)
      : dim_(dim), fn_(std::move(fn)), x_independent_(x_independent) {}

  int dim() const { return dim_; }
  bool x_independent() const { return x_independent_; }
  bool empty() const { return !fn_; }
  Jet jet(const Vec& x, const Vec& xi) const { return fn_(x, xi); }
  Scalar operator()(const Vec& x, const Vec& xi) const { return fn_(x, xi).value; }

 private:
  int dim_ = 0;
  Fn fn_;
  bool x_independent_ = false;
};

using RealSymbol = BasicSymbol<double>;
using SymbolFunction = BasicSymbol<Complex>;

SymbolFunction to_complex(const RealSymbol& s);

/// f(p(x, xi)) with exact chain-rule derivatives; `f` returns a jet of order >= 2.
RealSymbol compose_with_principal(std::shared_ptr<const MetricField> metric,
                                  std::function<TaylorJet(double)> f);

/// q0 = psi o p.
RealSymbol make_q0(std::shared_ptr<const MetricField> metric, const SemiclassicalPsi& psi);

/// Pure kinetic Hamiltonian |xi|^sigma (valid away from xi = 0).
RealSymbol power_symbol(int dim, double sigma);

/// cutoff(p(x, xi)) * envelope(x); envelope given with gradient and Hessian.
struct Envelope {
  bool constant = false;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> grad;
  std::function<Mat(const Vec&)> hess;
};

Envelope constant_envelope(int dim);
/// exp(kappa (cos(2 pi x / L) - 1)) in d = 1: smooth, periodic, x-dependent.
Envelope periodic_envelope(double box_length, double kappa);

RealSymbol cutoff_symbol(std::shared_ptr<const MetricField> metric, const CutoffFunction& cut,
                         const Envelope& envelope);

}  // namespace fracwkb
