#pragma once

#include <array>
#include <cassert>
#include <cmath>

namespace fracwkb {

/// Truncated univariate Taylor series c_0 + c_1 e + ... + c_K e^K.
///
/// Used to obtain exact derivatives of the glued-exponential cutoffs and of
/// lambda -> cutoff(lambda) * lambda^(s) to any order up to kMaxOrder, without
/// hand-deriving each formula. Derivative k equals k! * coefficient k.
class TaylorJet {
 public:
  static constexpr int kMaxOrder = 7;

  TaylorJet() = default;
  explicit TaylorJet(int order, double value = 0.0) : order_(order) {
    assert(order >= 0 && order <= kMaxOrder);
    c_[0] = value;
  }

  /// The identity jet lambda -> lambda expanded at `at`.
  static TaylorJet variable(int order, double at) {
    TaylorJet j(order, at);
    if (order >= 1) j.c_[1] = 1.0;
    return j;
  }

  int order() const { return order_; }
  double value() const { return c_[0]; }
  double coeff(int k) const { return c_[k]; }
  double& coeff(int k) { return c_[k]; }

  double derivative(int k) const {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f * c_[k];
  }

  TaylorJet operator-() const {
    TaylorJet r(order_);
    for (int k = 0; k <= order_; ++k) r.c_[k] = -c_[k];
    return r;
  }
  TaylorJet& operator+=(const TaylorJet& o) {
    for (int k = 0; k <= order_; ++k) c_[k] += o.c_[k];
    return *this;
  }
  TaylorJet& operator-=(const TaylorJet& o) {
    for (int k = 0; k <= order_; ++k) c_[k] -= o.c_[k];
    return *this;
  }
  TaylorJet& operator*=(double s) {
    for (int k = 0; k <= order_; ++k) c_[k] *= s;
    return *this;
  }

  friend TaylorJet operator+(TaylorJet a, const TaylorJet& b) { return a += b; }
  friend TaylorJet operator-(TaylorJet a, const TaylorJet& b) { return a -= b; }
  friend TaylorJet operator*(TaylorJet a, double s) { return a *= s; }
  friend TaylorJet operator*(double s, TaylorJet a) { return a *= s; }
  friend TaylorJet operator+(TaylorJet a, double s) {
    a.c_[0] += s;
    return a;
  }
  friend TaylorJet operator-(double s, const TaylorJet& a) {
    TaylorJet r = -a;
    r.c_[0] += s;
    return r;
  }

  friend TaylorJet operator*(const TaylorJet& a, const TaylorJet& b) {
    TaylorJet r(a.order_);
    for (int k = 0; k <= a.order_; ++k) {
      double s = 0.0;
      for (int j = 0; j <= k; ++j) s += a.c_[j] * b.c_[k - j];
      r.c_[k] = s;
    }
    return r;
  }

  friend TaylorJet reciprocal(const TaylorJet& a) {
    TaylorJet r(a.order_);
    r.c_[0] = 1.0 / a.c_[0];
    for (int k = 1; k <= a.order_; ++k) {
      double s = 0.0;
      for (int j = 1; j <= k; ++j) s += a.c_[j] * r.c_[k - j];
      r.c_[k] = -s / a.c_[0];
    }
    return r;
  }

  friend TaylorJet operator/(const TaylorJet& a, const TaylorJet& b) { return a * reciprocal(b); }

  friend TaylorJet exp(const TaylorJet& a) {
    TaylorJet r(a.order_);
    r.c_[0] = std::exp(a.c_[0]);
    for (int k = 1; k <= a.order_; ++k) {
      double s = 0.0;
      for (int j = 1; j <= k; ++j) s += j * a.c_[j] * r.c_[k - j];
      r.c_[k] = s / k;
    }
    return r;
  }

  /// a^p for a positive leading coefficient.
  friend TaylorJet pow(const TaylorJet& a, double p) {
    TaylorJet r(a.order_);
    r.c_[0] = std::pow(a.c_[0], p);
    for (int k = 1; k <= a.order_; ++k) {
      double s = 0.0;
      for (int j = 1; j <= k; ++j) s += (p * j - (k - j)) * a.c_[j] * r.c_[k - j];
      r.c_[k] = s / (k * a.c_[0]);
    }
    return r;
  }

 private:
  int order_ = 0;
  std::array<double, kMaxOrder + 1> c_{};
};

}  // namespace fracwkb
