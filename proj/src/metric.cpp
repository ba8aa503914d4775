#include "fracwkb/metric.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "fracwkb/error.hpp"

namespace fracwkb {

namespace {

void check_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) throw InvalidArgument(std::string(what) + " must be finite");
}

// Physicists' Hermite polynomial H_n; d^n/dx^n exp(-x^2) = (-1)^n H_n(x) exp(-x^2).
double hermite(int n, double x) {
  double h0 = 1.0;
  if (n == 0) return h0;
  double h1 = 2.0 * x;
  for (int k = 1; k < n; ++k) {
    const double h2 = 2.0 * x * h1 - 2.0 * k * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

}  // namespace

MetricField::MetricField(int dim, double box_length, int derivative_order, Evaluator eval,
                         std::string name)
    : dim_(dim),
      box_length_(box_length),
      derivative_order_(derivative_order),
      eval_(std::move(eval)),
      name_(std::move(name)) {
  if (dim < 1 || dim > kMaxDim) throw InvalidArgument("metric dimension must be in [1, 3]");
  if (!(box_length > 0.0) || !std::isfinite(box_length))
    throw InvalidArgument("box length must be positive");
  if (derivative_order < 0) throw InvalidArgument("derivative order must be nonnegative");
}

MetricField MetricField::flat(int dim, double box_length) {
  MetricField m(
      dim, box_length, 8,
      [dim](const Vec&, std::span<const int> alpha) -> Mat {
        const bool zero = std::all_of(alpha.begin(), alpha.end(), [](int a) { return a == 0; });
        return zero ? Mat(Mat::Identity(dim, dim)) : Mat(Mat::Zero(dim, dim));
      },
      "flat");
  m.flat_ = true;
  return m;
}

MetricField MetricField::gaussian_bump(int dim, double box_length, double epsilon) {
  if (!std::isfinite(epsilon) || epsilon <= -1.0)
    throw InvalidArgument("gaussian bump epsilon must be finite and > -1");
  MetricField m(
      dim, box_length, 8,
      [dim, epsilon](const Vec& x, std::span<const int> alpha) -> Mat {
        double factor = 1.0;
        bool zero = true;
        for (int j = 0; j < dim; ++j) {
          const int n = alpha[j];
          if (n != 0) zero = false;
          const double sign = (n % 2 == 0) ? 1.0 : -1.0;
          factor *= sign * hermite(n, x(j)) * std::exp(-x(j) * x(j));
        }
        const double s = epsilon * factor + (zero ? 1.0 : 0.0);
        return Mat(s * Mat::Identity(dim, dim));
      },
      "gaussian_bump");
  m.flat_ = (epsilon == 0.0);
  return m;
}

Mat MetricField::inverse_metric(const Vec& x) const {
  std::array<int, kMaxDim> zero{};
  return eval_(x, std::span<const int>(zero.data(), dim_));
}

Mat MetricField::derivative(const Vec& x, std::span<const int> alpha) const {
  if (static_cast<int>(alpha.size()) != dim_)
    throw InvalidArgument("multi-index size must equal the metric dimension");
  const int order = std::accumulate(alpha.begin(), alpha.end(), 0);
  if (order > derivative_order_) throw InvalidArgument("requested metric derivative exceeds derivative_order");
  return eval_(x, alpha);
}

double MetricField::volume_density(const Vec& x) const {
  return 1.0 / std::sqrt(inverse_metric(x).determinant());
}

double principal_symbol(const MetricField& m, const Vec& x, const Vec& xi) {
  check_finite(x, "x");
  check_finite(xi, "xi");
  if (x.size() != m.dim() || xi.size() != m.dim()) throw InvalidArgument("dimension mismatch");
  return xi.dot(m.inverse_metric(x) * xi);
}

PrincipalJet principal_jet(const MetricField& m, const Vec& x, const Vec& xi) {
  const int d = m.dim();
  PrincipalJet j;
  const Mat G = m.inverse_metric(x);
  j.value = xi.dot(G * xi);
  j.grad_xi = 2.0 * G * xi;
  j.hess_xixi = 2.0 * G;
  j.grad_x.resize(d);
  j.hess_xxi.resize(d, d);
  j.hess_xx.resize(d, d);
  if (m.is_flat()) {
    j.grad_x.setZero();
    j.hess_xxi.setZero();
    j.hess_xx.setZero();
    return j;
  }
  std::array<int, kMaxDim> alpha{};
  std::span<const int> a(alpha.data(), d);
  for (int k = 0; k < d; ++k) {
    alpha.fill(0);
    alpha[k] = 1;
    const Mat dG = m.derivative(x, a);
    j.grad_x(k) = xi.dot(dG * xi);
    j.hess_xxi.row(k) = (2.0 * dG * xi).transpose();
    for (int l = k; l < d; ++l) {
      alpha.fill(0);
      alpha[k] += 1;
      alpha[l] += 1;
      const double v = xi.dot(m.derivative(x, a) * xi);
      j.hess_xx(k, l) = v;
      j.hess_xx(l, k) = v;
    }
  }
  return j;
}

std::vector<std::vector<int>> multi_indices(int dim, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(dim, 0);
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == dim - 1) {
      cur[pos] = left;
      out.push_back(cur);
      return;
    }
    for (int v = left; v >= 0; --v) {
      cur[pos] = v;
      rec(pos + 1, left - v);
    }
  };
  rec(0, k);
  return out;
}

std::vector<Vec> box_samples(const MetricField& m, int per_dim) {
  const int d = m.dim();
  const double L = m.box_length();
  std::vector<Vec> pts;
  std::vector<int> idx(d, 0);
  while (true) {
    Vec x(d);
    for (int j = 0; j < d; ++j) x(j) = -0.5 * L + L * idx[j] / per_dim;
    pts.push_back(x);
    int j = 0;
    while (j < d && ++idx[j] == per_dim) idx[j++] = 0;
    if (j == d) break;
  }
  return pts;
}

AssumptionReport audit_assumptions(const MetricField& m, std::span<const Vec> samples) {
  if (m.derivative_order() < 2) throw InvalidArgument("audit requires derivative_order >= 2");
  AssumptionReport r;
  r.min_eigenvalue = std::numeric_limits<double>::infinity();
  r.max_eigenvalue = -std::numeric_limits<double>::infinity();
  r.derivative_bounds.assign(m.derivative_order(), 0.0);
  std::vector<std::vector<std::vector<int>>> alphas;
  for (int k = 1; k <= m.derivative_order(); ++k) alphas.push_back(multi_indices(m.dim(), k));

  for (const Vec& x : samples) {
    const Mat G = m.inverse_metric(x);
    if (!G.allFinite()) throw EllipticityViolation("non-finite metric entry");
    if ((G - G.transpose()).cwiseAbs().maxCoeff() != 0.0)
      throw EllipticityViolation("inverse metric is not symmetric");
    Eigen::SelfAdjointEigenSolver<Mat> es(G, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0.0)) {
      throw EllipticityViolation("inverse metric not positive definite at x[0] = " +
                                 std::to_string(x(0)) + " (eigenvalue " + std::to_string(lo) + ")");
    }
    r.min_eigenvalue = std::min(r.min_eigenvalue, lo);
    r.max_eigenvalue = std::max(r.max_eigenvalue, hi);
    for (int k = 1; k <= m.derivative_order(); ++k) {
      for (const auto& alpha : alphas[k - 1]) {
        const double v = m.derivative(x, alpha).cwiseAbs().maxCoeff();
        r.derivative_bounds[k - 1] = std::max(r.derivative_bounds[k - 1], v);
      }
    }
  }
  r.ellipticity = std::max({1.0, r.max_eigenvalue, 1.0 / r.min_eigenvalue});
  return r;
}

}  // namespace fracwkb
