#include "fracwkb/symbols.hpp"

#include <cmath>

#include "fracwkb/error.hpp"

namespace fracwkb {

TaylorJet smooth_step(const TaylorJet& u) {
  if (u.value() <= 0.0) return TaylorJet(u.order(), 0.0);
  if (u.value() >= 1.0) return TaylorJet(u.order(), 1.0);
  const TaylorJet f = exp(-reciprocal(u));
  const TaylorJet g = exp(-reciprocal(1.0 - u));
  return f / (f + g);
}

CutoffFunction::CutoffFunction(double r1, double r2, Interval plateau)
    : r1_(r1), r2_(r2), plateau_(plateau) {
  const bool finite = std::isfinite(r1) && std::isfinite(r2) && std::isfinite(plateau.lo) &&
                      std::isfinite(plateau.hi);
  if (!finite || !(0.0 < r1 && r1 < plateau.lo && plateau.lo < plateau.hi && plateau.hi < r2)) {
    throw InvalidArgument("cutoff requires 0 < r1 < plateau.lo < plateau.hi < r2");
  }
}

TaylorJet CutoffFunction::jet(const TaylorJet& lambda) const {
  const double v = lambda.value();
  if (v <= r1_ || v >= r2_) return TaylorJet(lambda.order(), 0.0);
  if (plateau_.contains(v)) return TaylorJet(lambda.order(), 1.0);
  if (v < plateau_.lo) return smooth_step((lambda + (-r1_)) * (1.0 / (plateau_.lo - r1_)));
  return smooth_step((r2_ - lambda) * (1.0 / (r2_ - plateau_.hi)));
}

TaylorJet CutoffFunction::jet(double lambda, int order) const {
  return jet(TaylorJet::variable(order, lambda));
}

CutoffFunction CutoffFunction::widened(double margin) const {
  if (!(margin >= 1.0)) throw InvalidArgument("widening margin must be at least 1");
  return CutoffFunction(0.5 * r1_ / margin, 2.0 * r2_ * margin, Interval{r1_ / margin, r2_ * margin});
}

CutoffFunction make_bump(double r1, double r2, Interval plateau) {
  return CutoffFunction(r1, r2, plateau);
}

LittlewoodPaley::LittlewoodPaley(int k_max) : k_max_(k_max) {
  if (k_max < 1) throw InvalidArgument("Littlewood-Paley partition needs k_max >= 1");
}

double LittlewoodPaley::chi(double lambda) const {
  const TaylorJet u(0, (std::abs(lambda) - 1.0) / 3.0);
  return 1.0 - smooth_step(u).value();
}

double LittlewoodPaley::partial_sum(double lambda) const {
  double s = phi0(lambda);
  double scale = 1.0;
  for (int k = 1; k <= k_max_; ++k) {
    scale *= 0.25;
    s += phi(scale * lambda);
  }
  return s;
}

double LittlewoodPaley::exact_range() const { return std::pow(4.0, k_max_); }

LittlewoodPaley::Check LittlewoodPaley::check(const std::vector<double>& lambdas) const {
  Check c;
  const double range = exact_range();
  for (double l : lambdas) {
    const double err = std::abs(partial_sum(l) - 1.0);
    if (std::abs(l) <= range) {
      c.max_error = std::max(c.max_error, err);
    } else if (err > 1e-12) {
      ++c.truncated_points;
    }
  }
  return c;
}

SemiclassicalPsi::SemiclassicalPsi(CutoffFunction cut, double sigma) : cut_(cut), sigma_(sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma) || sigma == 1.0)
    throw InvalidArgument("sigma must lie in (0, inf) minus {1}");
}

TaylorJet SemiclassicalPsi::jet(double lambda, int order) const {
  if (lambda <= cut_.support().lo || lambda >= cut_.support().hi) return TaylorJet(order, 0.0);
  const TaylorJet l = TaylorJet::variable(order, lambda);
  return cut_.jet(l) * pow(l, 0.5 * sigma_);
}

SemiclassicalPsi semiclassical_psi(const CutoffFunction& cut, double sigma) {
  return SemiclassicalPsi(cut, sigma);
}

SymbolFunction to_complex(const RealSymbol& s) {
  return SymbolFunction(
      s.dim(),
      [s](const Vec& x, const Vec& xi) {
        const auto r = s.jet(x, xi);
        SymbolJet<Complex> c;
        c.value = r.value;
        c.grad_x = r.grad_x.cast<Complex>();
        c.grad_xi = r.grad_xi.cast<Complex>();
        c.hess_xx = r.hess_xx.cast<Complex>();
        c.hess_xxi = r.hess_xxi.cast<Complex>();
        c.hess_xixi = r.hess_xixi.cast<Complex>();
        return c;
      },
      s.x_independent());
}

RealSymbol compose_with_principal(std::shared_ptr<const MetricField> metric,
                                  std::function<TaylorJet(double)> f) {
  const int d = metric->dim();
  const bool flat = metric->is_flat();
  return RealSymbol(
      d,
      [metric, f](const Vec& x, const Vec& xi) {
        const PrincipalJet p = principal_jet(*metric, x, xi);
        const TaylorJet fj = f(p.value);
        const double f0 = fj.value();
        const double f1 = fj.derivative(1);
        const double f2 = fj.derivative(2);
        SymbolJet<double> j;
        j.value = f0;
        j.grad_x = f1 * p.grad_x;
        j.grad_xi = f1 * p.grad_xi;
        j.hess_xx = f2 * p.grad_x * p.grad_x.transpose() + f1 * p.hess_xx;
        j.hess_xxi = f2 * p.grad_x * p.grad_xi.transpose() + f1 * p.hess_xxi;
        j.hess_xixi = f2 * p.grad_xi * p.grad_xi.transpose() + f1 * p.hess_xixi;
        return j;
      },
      flat);
}

RealSymbol make_q0(std::shared_ptr<const MetricField> metric, const SemiclassicalPsi& psi) {
  return compose_with_principal(std::move(metric), [psi](double p) { return psi.jet(p, 2); });
}

RealSymbol power_symbol(int dim, double sigma) {
  return RealSymbol(
      dim,
      [dim, sigma](const Vec&, const Vec& xi) {
        auto j = SymbolJet<double>::zero(dim);
        const double r2 = xi.squaredNorm();
        if (r2 == 0.0) return j;
        const double r = std::sqrt(r2);
        j.value = std::pow(r, sigma);
        const double c = sigma * std::pow(r, sigma - 2.0);
        j.grad_xi = c * xi;
        j.hess_xixi = c * (Mat::Identity(dim, dim) + (sigma - 2.0) * xi * xi.transpose() / r2);
        return j;
      },
      true);
}

Envelope constant_envelope(int dim) {
  Envelope e;
  e.constant = true;
  e.value = [](const Vec&) { return 1.0; };
  e.grad = [dim](const Vec&) { return Vec(Vec::Zero(dim)); };
  e.hess = [dim](const Vec&) { return Mat(Mat::Zero(dim, dim)); };
  return e;
}

Envelope periodic_envelope(double box_length, double kappa) {
  const double k = 2.0 * kPi / box_length;
  Envelope e;
  e.value = [=](const Vec& x) { return std::exp(kappa * (std::cos(k * x(0)) - 1.0)); };
  e.grad = [=](const Vec& x) {
    const double w = std::exp(kappa * (std::cos(k * x(0)) - 1.0));
    return vec1(-kappa * k * std::sin(k * x(0)) * w);
  };
  e.hess = [=](const Vec& x) {
    const double w = std::exp(kappa * (std::cos(k * x(0)) - 1.0));
    const double s = std::sin(k * x(0));
    const double c = std::cos(k * x(0));
    Mat m(1, 1);
    m(0, 0) = (kappa * kappa * k * k * s * s - kappa * k * k * c) * w;
    return m;
  };
  return e;
}

RealSymbol cutoff_symbol(std::shared_ptr<const MetricField> metric, const CutoffFunction& cut,
                         const Envelope& envelope) {
  const RealSymbol c = compose_with_principal(metric, [cut](double p) { return cut.jet(p, 2); });
  const bool x_indep = metric->is_flat() && envelope.constant;
  return RealSymbol(
      metric->dim(),
      [c, envelope](const Vec& x, const Vec& xi) {
        const auto cj = c.jet(x, xi);
        const double w = envelope.value(x);
        const Vec gw = envelope.grad(x);
        const Mat hw = envelope.hess(x);
        SymbolJet<double> j;
        j.value = cj.value * w;
        j.grad_x = cj.grad_x * w + cj.value * gw;
        j.grad_xi = cj.grad_xi * w;
        j.hess_xx = cj.hess_xx * w + cj.grad_x * gw.transpose() + gw * cj.grad_x.transpose() +
                    cj.value * hw;
        j.hess_xxi = cj.hess_xxi * w + gw * cj.grad_xi.transpose();
        j.hess_xixi = cj.hess_xixi * w;
        return j;
      },
      x_indep);
}

}  // namespace fracwkb
