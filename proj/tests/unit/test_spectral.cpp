#include <cmath>
#include <random>

#include "doctest.h"
#include "fracwkb/error.hpp"
#include "fracwkb/spectral.hpp"

using namespace fracwkb;

namespace {

StateField mode(const PeriodicGrid& g, int m, Complex amp = 1.0) {
  CVector v(static_cast<Eigen::Index>(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = amp * std::polar(1.0, 2 * kPi * m / g.box_length() * g.point(i)(0));
  return StateField(g, v);
}

}  // namespace

TEST_CASE("fourier coefficients use true positions and satisfy Parseval") {
  const PeriodicGrid g(1, 64, 10.0);
  const auto u = mode(g, 3, Complex(0.5, -1.0));
  const CVector& c = u.fourier();
  CHECK(std::abs(c(3) - Complex(0.5, -1.0)) < 1e-13);
  std::mt19937_64 rng(1);
  const auto r = random_band_limited(g, 10.0, rng);
  CHECK(std::abs(r.l2_norm() * r.l2_norm() - 10.0 * r.fourier().squaredNorm()) < 1e-12 * r.l2_norm() * r.l2_norm());
  const auto back = StateField::from_fourier(g, r.fourier());
  CHECK((back.values() - r.values()).norm() < 1e-12 * r.values().norm());
}

TEST_CASE("two-dimensional transforms") {
  const PeriodicGrid g(2, 16, 2 * kPi);
  CVector v(static_cast<Eigen::Index>(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec x = g.point(i);
    v(static_cast<Eigen::Index>(i)) = std::polar(1.0, 2 * x(0) - 3 * x(1));
  }
  const StateField u(g, v);
  const auto& c = u.fourier();
  Eigen::Index imax;
  c.cwiseAbs().maxCoeff(&imax);
  const Vec k = g.wavevector(static_cast<std::size_t>(imax));
  CHECK(k(0) == doctest::Approx(2.0));
  CHECK(k(1) == doctest::Approx(-3.0));
  CHECK(std::abs(c(imax) - 1.0) < 1e-13);
}

TEST_CASE("propagation is unitary and advances single modes exactly") {
  const PeriodicGrid g(1, 128, 2 * kPi);
  const auto op = SpectralOperator::flat(g);
  std::mt19937_64 rng(7);
  const auto u = random_band_limited(g, 40.0, rng);
  CHECK((propagate(u, op, 2.0, 0.0).values() - u.values()).norm() == 0.0);
  for (double sigma : {0.5, 2.0, 3.0}) {
    const auto v = propagate(u, op, sigma, 0.73);
    CHECK(std::abs(v.l2_norm() - u.l2_norm()) < 1e-12 * u.l2_norm());
  }
  const auto m = mode(g, 5);
  const auto pm = propagate(m, op, 2.0, 0.3);
  CHECK(std::abs(pm.fourier()(5) - std::polar(1.0, 0.3 * 25)) < 1e-12);
  // Semiclassical form: exp(i t h^{-1} (h|k|)^sigma).
  const auto ps = propagate(m, op, 3.0, 0.3, 0.5);
  CHECK(std::abs(ps.fourier()(5) - std::polar(1.0, 0.3 / 0.5 * std::pow(2.5, 3))) < 1e-12);
}

TEST_CASE("flat group property") {
  const PeriodicGrid g(1, 128, 2 * kPi);
  const auto op = SpectralOperator::flat(g);
  std::mt19937_64 rng(9);
  const auto u = random_band_limited(g, 30.0, rng);
  const auto a = propagate(propagate(u, op, 0.5, 0.4), op, 0.5, 0.7);
  const auto b = propagate(u, op, 0.5, 1.1);
  CHECK((a.values() - b.values()).norm() < 1e-12 * u.values().norm());
}

TEST_CASE("frequency localization") {
  const double h = 1.0 / 16;
  const PeriodicGrid g(1, 256, 2 * kPi);
  const auto op = SpectralOperator::flat(g);
  const auto cut = make_bump(0.25, 4.0, {0.5, 2.0});
  const auto pass = mode(g, 16);
  CHECK((frequency_localize(pass, op, cut, h).values() - pass.values()).norm() < 1e-12);
  const auto kill = mode(g, 160);  // h^2 |k|^2 = 100
  CHECK(frequency_localize(kill, op, cut, h).values().norm() < 1e-12);
}

TEST_CASE("Littlewood-Paley reconstruction on the discrete spectrum") {
  const PeriodicGrid g(1, 512, 2 * kPi);
  const auto op = SpectralOperator::flat(g);
  const LittlewoodPaley lp(6);
  std::mt19937_64 rng(11);
  const auto u = random_band_limited(g, 60.0, rng);  // 60^2 < 4^6
  const auto r = littlewood_paley_reconstruct(u, op, lp);
  CHECK((r - u).l2_norm() / u.l2_norm() < 1e-10);
  const double ratio = almost_orthogonality_ratio(u, op, lp);
  CHECK(ratio <= 2.0);
  CHECK(ratio >= 0.5);
}

TEST_CASE("sobolev norms") {
  const PeriodicGrid g(1, 64, 2 * kPi);
  const auto op = SpectralOperator::flat(g);
  std::mt19937_64 rng(5);
  const auto u = random_band_limited(g, 20.0, rng);
  CHECK(sobolev_norm(u, 0.0, op) == doctest::Approx(u.l2_norm()).epsilon(1e-12));
  const auto m = mode(g, 1, 3.0);
  for (double gamma : {-1.0, 0.5, 2.0})
    CHECK(sobolev_norm(m, gamma, op) == doctest::Approx(std::pow(2.0, gamma / 2) * 3.0 * std::sqrt(2 * kPi)).epsilon(1e-12));
  // gamma = 2: ||u||^2 + 2||u'||^2 + ||u''||^2 from explicit Fourier-side derivatives.
  CVector d1 = u.fourier(), d2 = u.fourier();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double k = g.wavevector(i)(0);
    d1(static_cast<Eigen::Index>(i)) *= Complex(0, k);
    d2(static_cast<Eigen::Index>(i)) *= -k * k;
  }
  const double n0 = u.l2_norm(), n1 = StateField::from_fourier(g, d1).l2_norm(), n2 = StateField::from_fourier(g, d2).l2_norm();
  CHECK(sobolev_norm(u, 2.0, op) == doctest::Approx(std::sqrt(n0 * n0 + 2 * n1 * n1 + n2 * n2)).epsilon(1e-12));
}

TEST_CASE("space-time norms") {
  const PeriodicGrid g(1, 32, 4.0);
  const auto c = StateField(g, CVector::Constant(32, 2.0));
  Trajectory tr;
  for (int i = 0; i <= 10; ++i) {
    tr.times.push_back(0.3 * i / 10);
    tr.states.push_back(c);
  }
  CHECK(lp_lq_norm(tr, 2, 2) == doctest::Approx(std::sqrt(0.3) * c.l2_norm()).epsilon(1e-13));
  CHECK(lp_lq_norm(tr, INFINITY, 4) == doctest::Approx(2.0 * std::pow(4.0, 0.25)).epsilon(1e-13));
  // Indicator-like field: ones on 8 of 32 cells, Riemann value (8 dx)^{1/q}.
  CVector ind = CVector::Zero(32);
  ind.head(8).setOnes();
  CHECK(lq_norm(StateField(g, ind), 3.0) == doctest::Approx(std::pow(8 * 4.0 / 32, 1.0 / 3)).epsilon(1e-13));
  Trajectory empty;
  CHECK_THROWS_AS(lp_lq_norm(empty, 2, 2), InvalidArgument);
}

TEST_CASE("space-time norm is stable under time refinement") {
  const PeriodicGrid g(1, 128, 2 * kPi);
  const auto op = SpectralOperator::flat(g);
  const auto u = gaussian_packet(g, vec1(0.0), 0.4, vec1(6.0));
  auto norm = [&](int nt) {
    Trajectory tr;
    for (int i = 0; i <= nt; ++i) {
      tr.times.push_back(1.0 * i / nt);
      tr.states.push_back(propagate(u, op, 2.0, tr.times.back()));
    }
    return lp_lq_norm(tr, 8, 4);
  };
  const double a = norm(200), b = norm(400);
  CHECK(std::abs(a - b) / b < 5e-3);
}

TEST_CASE("eigen discretization of the flat metric reproduces Fourier modes") {
  const auto m = MetricField::flat(1, 2 * kPi);
  const auto op = discretize_P_1d(m, 33);
  const auto& l = op.eigenvalues();
  CHECK(l(0) == doctest::Approx(0.0));
  for (int k = 1; k <= 16; ++k) {
    CHECK(l(2 * k - 1) == doctest::Approx(k * k).epsilon(1e-10));
    CHECK(l(2 * k) == doctest::Approx(k * k).epsilon(1e-10));
  }
  // Constant eigenfunction at the bottom.
  CHECK(op.eigenvectors().col(0).maxCoeff() - op.eigenvectors().col(0).minCoeff() < 1e-10);
  CHECK_THROWS_AS(discretize_P_1d(m, 32), InvalidArgument);
  CHECK_THROWS_AS(discretize_P_1d(MetricField::flat(2, 1.0), 33), InvalidArgument);
}

TEST_CASE("bump-metric eigenvalues converge spectrally and are weighted-orthonormal") {
  const auto m = MetricField::gaussian_bump(1, 4 * kPi, 0.5);
  const auto a = discretize_P_1d(m, 65), b = discretize_P_1d(m, 129), c = discretize_P_1d(m, 257);
  double e1 = 0.0, e2 = 0.0;
  for (int j = 0; j < 10; ++j) {
    e1 = std::max(e1, std::abs(a.eigenvalues()(j) - c.eigenvalues()(j)));
    e2 = std::max(e2, std::abs(b.eigenvalues()(j) - c.eigenvalues()(j)));
  }
  CHECK(e2 < 1e-9);
  CHECK((e1 < 1e-12 || e2 < 1e-3 * e1));
  const auto& E = b.eigenvectors();
  const Eigen::MatrixXd gram = E.transpose() * b.weight().asDiagonal() * E * b.grid().spacing();
  CHECK((gram - Eigen::MatrixXd::Identity(129, 129)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(b.eigenvalues().minCoeff() >= 0.0);
}

TEST_CASE("eigen propagation is unitary in the weighted norm") {
  const auto op = discretize_P_1d(MetricField::gaussian_bump(1, 4 * kPi, 0.5), 101);
  const auto u = gaussian_packet(op.grid(), vec1(1.0), 0.7, vec1(3.0));
  const auto v = propagate(u, op, 3.0, 0.9);
  CHECK(std::abs(op.l2_norm(v) - op.l2_norm(u)) < 1e-12 * op.l2_norm(u));
}

TEST_CASE("kernel projection") {
  const auto op = discretize_P_1d(MetricField::gaussian_bump(1, 4 * kPi, 0.5), 101);
  const auto& g = op.grid();
  CHECK(kernel_dimension(op) == 1);
  const StateField one(g, CVector::Constant(101, Complex(2.0, -1.0)));
  CHECK((kernel_projection(op, one) - one).l2_norm() < 1e-10);
  const auto mean_zero = op.apply([](double l) { return l > 1e-6 ? Complex(1) : Complex(0); },
                                  gaussian_packet(g, vec1(0.0), 1.0, vec1(0.0)));
  CHECK(kernel_projection(op, mean_zero).l2_norm() < 1e-10);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  CVector r(101);
  for (auto& z : r) z = Complex(n01(rng), n01(rng));
  const StateField u(g, r);
  Complex mean = (op.weight().cast<Complex>().array() * r.array()).sum() / op.weight().sum();
  const auto p = kernel_projection(op, u);
  CHECK((p.values() - CVector::Constant(101, mean)).norm() < 1e-10 * r.norm());
}

TEST_CASE("kernel projection reports an ambiguous gap") {
  const auto flat = SpectralOperator::flat(PeriodicGrid(1, 16, 2 * kPi));
  RVector l(3);
  l << 1.0, 2.0, 3.0;
  const auto no_kernel = SpectralOperator::eig(PeriodicGrid(1, 3, 1.0), l, Eigen::MatrixXd::Identity(3, 3), RVector::Ones(3));
  CHECK_THROWS_AS(kernel_dimension(no_kernel), SpectralGapError);
  l << 0.0, 1e-7, 3.0;
  const auto blurred = SpectralOperator::eig(PeriodicGrid(1, 3, 1.0), l, Eigen::MatrixXd::Identity(3, 3), RVector::Ones(3));
  CHECK_THROWS_AS(kernel_dimension(blurred), SpectralGapError);
  CHECK(kernel_dimension(flat) == 1);
}

TEST_CASE("Bernstein norm scales like h^{-d/2}") {
  const auto cut = make_bump(0.25, 4.0, {0.5, 2.0});
  const PeriodicGrid g(1, 2048, 2 * kPi);
  const auto op = SpectralOperator::flat(g);
  const double a = bernstein_norm(op, cut, 1.0 / 16), b = bernstein_norm(op, cut, 1.0 / 256);
  const double slope = std::log(b / a) / std::log((1.0 / 256) / (1.0 / 16));
  CHECK(slope == doctest::Approx(-0.5).epsilon(0.1));
  // The bound is attained: the extremal state's localized sup equals the norm.
  std::mt19937_64 rng(2);
  const auto u = random_band_limited(g, 500.0, rng);
  const auto v = frequency_localize(u, op, cut, 1.0 / 64);
  CHECK(v.sup_norm() <= bernstein_norm(op, cut, 1.0 / 64) * u.l2_norm() * (1 + 1e-12));
}
