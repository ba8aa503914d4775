#include <cmath>
#include <random>

#include "doctest.h"
#include "fracwkb/error.hpp"
#include "fracwkb/strichartz.hpp"

using namespace fracwkb;

namespace {

const CutoffFunction kPhi = make_bump(0.25, 4.0, {0.5, 2.0});

std::vector<double> dyadic(int k_lo, int k_hi) {
  std::vector<double> hs;
  for (int k = k_lo; k <= k_hi; ++k) hs.push_back(std::pow(2.0, -k));
  return hs;
}

ScalingOptions quick() {
  ScalingOptions o;
  o.max_steps = 400;
  return o;
}

}  // namespace

TEST_CASE("admissible pairs") {
  SUBCASE("(2, 6, 3, 2): gamma 0, total 1/2") {
    const auto a = classify_pair(2, 6, 3, 2.0);
    CHECK(a.valid);
    CHECK(a.gamma == 0.0);
    CHECK(a.loss == 0.5);
    CHECK(a.total == 0.5);
  }
  SUBCASE("the total exponent does not depend on sigma > 1") {
    for (double sigma : {1.5, 2.0, 3.0, 7.25}) {
      const auto a = classify_pair(2, 6, 3, sigma);
      CHECK(a.total == 0.5);
      CHECK(a.gamma + a.loss == doctest::Approx(0.5).epsilon(1e-14));
    }
  }
  SUBCASE("(2, inf, 2) is excluded") { CHECK_FALSE(classify_pair(2, kInf, 2, 2.0).valid); }
  SUBCASE("(8, 4, 1, 2) sits on the admissible line") {
    const auto a = classify_pair(8, 4, 1, 2.0);
    CHECK(a.valid);
    CHECK(a.gamma == 0.0);
    CHECK(a.loss == 0.125);
  }
  SUBCASE("sigma < 1 carries no loss") {
    const auto a = classify_pair(8, 4, 1, 0.5);
    CHECK(a.loss == 0.0);
    CHECK(a.gamma == 0.1875);
    CHECK(a.total == a.gamma);
  }
  SUBCASE("range violations") {
    CHECK_FALSE(classify_pair(1.5, 4, 1, 2.0).valid);
    CHECK_FALSE(classify_pair(4, 1.9, 1, 2.0).valid);
    CHECK_FALSE(classify_pair(4, 4, 1, 2.0).valid);  // 1/2 + 1/4 > 1/2
    CHECK(classify_pair(kInf, 2, 1, 2.0).valid);
    CHECK_THROWS_AS(classify_pair(2, 2, 1, 1.0), InvalidArgument);
  }
}

TEST_CASE("interval tiling") {
  CHECK(tile_interval({0, 2}, 0.25, 2.0) == 4);
  CHECK(tile_interval({0, 2}, 0.5, 3.0) == 4);
  CHECK_THROWS_AS(tile_interval({0, 2}, 0.25, 0.5), InvalidArgument);
  for (double sigma : {1.5, 2.0, 3.0})
    for (double h : {0.3, 0.1, 0.01}) {
      const long n = tile_interval({-1, 2}, h, sigma);
      const long m = tile_interval({-1, 2}, 0.5 * h, sigma);
      CHECK(std::abs(m - std::pow(2.0, sigma - 1.0) * n) <= std::pow(2.0, sigma - 1.0) + 1.0);
      CHECK(n <= (3.0 / 2 + 1) * std::pow(h, 1 - sigma));
    }
}

TEST_CASE("graded time grid") {
  const auto t = graded_times(1e-3, 2.0, 1.1, 100);
  CHECK(t.front() == 0.0);
  CHECK(t.back() == 2.0);
  for (std::size_t i = 1; i < t.size(); ++i) CHECK(t[i] > t[i - 1]);
  CHECK(t[1] == doctest::Approx(1e-3));
  double widest = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) widest = std::max(widest, t[i] - t[i - 1]);
  CHECK(widest <= 1.25 * 0.02);
}

TEST_CASE("time norms") {
  const std::vector<double> t{0.0, 0.5, 1.0, 2.0};
  CHECK(time_norm(t, {3, 3, 3, 3}, 2.0) == doctest::Approx(3 * std::sqrt(2.0)));
  CHECK(time_norm(t, {1, 4, 2, 3}, kInf) == 4.0);
  CHECK_THROWS_AS(time_norm(t, {1, 2}, 2.0), InvalidArgument);
}

TEST_CASE("semiclassical scaling stays under the bound") {
  const auto pair = classify_pair(8, 4, 1, 2.0);
  // sigma = 1/2 disperses slowly and needs smaller h before the slope settles.
  for (double sigma : {2.0, 0.5}) {
    const auto hs = sigma > 1.0 ? dyadic(3, 6) : dyadic(5, 8);
    const auto s = measure_semiclassical_scaling(sigma, pair, kPhi, hs, 1.0, quick());
    CHECK(s.bound == doctest::Approx(-0.125));
    CHECK(s.passes());
  }
}

TEST_CASE("q = 2 gives an h-independent ratio") {
  const auto pair = classify_pair(kInf, 2, 1, 2.0);
  const auto s = measure_semiclassical_scaling(2.0, pair, kPhi, dyadic(3, 6), 0.5, quick());
  CHECK(std::abs(s.fit.slope) < 1e-8);
  CHECK(s.samples.front().ratio == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("unscaled scaling against gamma plus loss") {
  SUBCASE("sigma = 2") {
    const auto pair = classify_pair(8, 4, 1, 2.0);
    const auto s = measure_unscaled_scaling(2.0, pair, kPhi, dyadic(3, 6), {0, 1}, quick());
    CHECK(s.bound == doctest::Approx(-0.125));
    CHECK(s.passes());
    // The flat box admits the lossless exponent as well.
    CHECK(s.fit.slope >= -pair.gamma - 0.1);
  }
  SUBCASE("sigma = 1/2") {
    const auto pair = classify_pair(8, 4, 1, 0.5);
    const auto s = measure_unscaled_scaling(0.5, pair, kPhi, dyadic(3, 6), {0, 1}, quick());
    CHECK(s.bound == doctest::Approx(-0.1875));
    CHECK(s.passes());
  }
}

TEST_CASE("norms grow with the time interval") {
  const auto pair = classify_pair(8, 4, 1, 2.0);
  const auto hs = dyadic(3, 5);
  const auto a = measure_semiclassical_scaling(2.0, pair, kPhi, hs, 0.5, quick());
  const auto b = measure_semiclassical_scaling(2.0, pair, kPhi, hs, 1.0, quick());
  for (std::size_t i = 0; i < hs.size(); ++i) CHECK(b.samples[i].ratio > a.samples[i].ratio);
}

TEST_CASE("time-rescaling identity") {
  const PeriodicGrid grid(1, 256, 4 * kPi);
  const auto op = SpectralOperator::flat(grid);
  std::mt19937_64 rng(3);
  const auto times = graded_times(1e-3, 1.0, 1.05, 200);
  for (double sigma : {0.5, 2.0, 3.0}) {
    const double h = 1.0 / 16;
    const auto v = frequency_localize(random_band_limited(grid, 2.0 / h, rng), op, kPhi, h);
    for (double p : {8.0, 4.0, kInf}) CHECK(scaling_identity(v, op, sigma, h, p, 4.0, times).relative_gap() < 1e-10);
  }
}

TEST_CASE("sweeps report the grid they would need") {
  ScalingOptions o = quick();
  o.max_points = 256;
  const auto pair = classify_pair(8, 4, 1, 2.0);
  CHECK_THROWS_AS(measure_semiclassical_scaling(2.0, pair, kPhi, dyadic(3, 9), 1.0, o), ResolutionError);
  CHECK_THROWS_AS(measure_semiclassical_scaling(2.0, classify_pair(4, 4, 1, 2.0), kPhi, dyadic(3, 5), 1.0, o),
                  InvalidArgument);
}
