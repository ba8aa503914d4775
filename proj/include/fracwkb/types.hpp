#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace fracwkb {

using Complex = std::complex<double>;

// Phase-space dimension is capped so that small vectors and matrices live on
// the stack; every hot loop in the flow integrator evaluates symbol jets.
inline constexpr int kMaxDim = 3;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
using CVec = Eigen::Matrix<Complex, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using CMat = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

// 2d x 2d phase-space Jacobians.
using PhaseMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 2 * kMaxDim, 2 * kMaxDim>;

inline constexpr double kPi = 3.14159265358979323846;

inline Vec vec1(double a) {
  Vec v(1);
  v(0) = a;
  return v;
}

inline Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace fracwkb
