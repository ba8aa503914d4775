#include "fracwkb/strichartz.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fracwkb/error.hpp"

namespace fracwkb {

namespace {

void check_sigma(double sigma) {
  if (!(sigma > 0.0) || sigma == 1.0 || !std::isfinite(sigma))
    throw InvalidArgument("sigma must lie in (0, inf) minus {1}");
}

// Spatial L^q norms of exp(i t omega(lambda)) u0 at each time.
std::vector<double> spatial_norms(const StateField& u0, const SpectralOperator& op,
                                  const std::function<double(double)>& omega, const std::vector<double>& times,
                                  double q) {
  const CVector c = op.coefficients(u0);
  std::vector<double> freq(c.size());
  for (Eigen::Index j = 0; j < c.size(); ++j) freq[j] = omega(std::max(op.eigenvalues()(j), 0.0));
  std::vector<double> out;
  out.reserve(times.size());
  CVector ct(c.size());
  for (double t : times) {
    for (Eigen::Index j = 0; j < c.size(); ++j) ct(j) = c(j) * std::polar(1.0, t * freq[j]);
    out.push_back(lq_norm(op.synthesize(ct), q));
  }
  return out;
}

std::vector<double> symmetric(const std::vector<double>& half) {
  std::vector<double> out;
  out.reserve(2 * half.size());
  for (auto it = half.rbegin(); it != half.rend(); ++it)
    if (*it != 0.0) out.push_back(-*it);
  out.insert(out.end(), half.begin(), half.end());
  return out;
}

void check_sweep(const AdmissiblePair& pair, const std::vector<double>& hs) {
  if (!pair.valid) throw InvalidArgument("pair is not fractional admissible");
  if (pair.d < 1 || pair.d > kMaxDim) throw InvalidArgument("unsupported dimension");
  if (hs.size() < 2) throw InsufficientData("scaling sweep needs at least two h values");
  for (double h : hs)
    if (!(h > 0.0 && h <= 1.0)) throw InvalidArgument("h must lie in (0, 1]");
}

template <class Ratio>
ScalingStudy sweep(const AdmissiblePair& pair, const CutoffFunction& cut, const std::vector<double>& hs,
                   const ScalingOptions& opts, Ratio ratio) {
  ScalingStudy study;
  std::vector<double> xs, ys;
  for (double h : hs) {
    const int n = scaling_points(cut, h, opts.box_length, opts.max_points);
    const PeriodicGrid grid(pair.d, n, opts.box_length);
    const auto op = SpectralOperator::flat(grid);
    const StateField u0 = localized_packet(grid, cut, h, opts);
    ScalingSample s;
    s.h = h;
    s.points = n;
    s.ratio = ratio(u0, op, h, s.times) / u0.l2_norm();
    study.samples.push_back(s);
    xs.push_back(h);
    ys.push_back(s.ratio);
  }
  study.fit = fit_loglog(xs, ys);
  return study;
}

}  // namespace

AdmissiblePair classify_pair(double p, double q, int d, double sigma) {
  check_sigma(sigma);
  if (d < 1) throw InvalidArgument("dimension must be positive");
  AdmissiblePair a;
  a.p = p;
  a.q = q;
  a.d = d;
  a.sigma = sigma;
  const bool ranges = p >= 2.0 && q >= 2.0 && std::isfinite(q);
  const bool excluded = p == 2.0 && std::isinf(q) && d == 2;
  const double lhs = 2.0 / p + d / q;
  a.valid = ranges && !excluded && lhs <= 0.5 * d + 1e-14;
  a.gamma = 0.5 * d - d / q - sigma / p;
  a.loss = sigma > 1.0 ? (sigma - 1.0) / p : 0.0;
  a.total = sigma > 1.0 ? 0.5 * d - d / q - 1.0 / p : a.gamma;
  return a;
}

long tile_interval(const Interval& I, double h, double sigma) {
  check_sigma(sigma);
  if (sigma < 1.0) throw InvalidArgument("interval tiling applies to sigma > 1 only");
  if (!(h > 0.0)) throw InvalidArgument("h must be positive");
  const double length = I.hi - I.lo;
  if (!(length >= 0.0) || !std::isfinite(length)) throw InvalidArgument("interval must be finite");
  const double x = length / (2.0 * std::pow(h, sigma - 1.0));
  return static_cast<long>(std::ceil(x * (1.0 - 1e-14)));
}

std::vector<double> graded_times(double first, double end, double growth, int max_steps) {
  if (!(first > 0.0) || !(end > 0.0) || !(growth >= 1.0) || max_steps < 1)
    throw InvalidArgument("graded time grid needs first > 0, end > 0, growth >= 1");
  const double cap = end / max_steps;
  std::vector<double> t{0.0};
  double step = std::min(first, cap);
  while (t.back() < end) {
    const double next = t.back() + step;
    // Merge a short final step into the previous one.
    if (next >= end - 0.25 * step) {
      t.push_back(end);
      break;
    }
    t.push_back(next);
    step = std::min(step * growth, cap);
  }
  return t;
}

double time_norm(const std::vector<double>& times, const std::vector<double>& spatial, double p) {
  if (times.empty() || times.size() != spatial.size()) throw InvalidArgument("time samples and norms differ");
  if (!(p >= 1.0)) throw InvalidArgument("p must be >= 1");
  if (std::isinf(p)) return *std::max_element(spatial.begin(), spatial.end());
  double acc = 0.0;
  for (std::size_t i = 1; i < times.size(); ++i)
    acc += 0.5 * (times[i] - times[i - 1]) * (std::pow(spatial[i], p) + std::pow(spatial[i - 1], p));
  return std::pow(acc, 1.0 / p);
}

StateField localized_packet(const PeriodicGrid& grid, const CutoffFunction& cut, double h,
                            const ScalingOptions& opts) {
  const Vec center = Vec::Zero(grid.dim());
  Vec k0 = Vec::Zero(grid.dim());
  k0(0) = opts.carrier / h;
  const auto packet = gaussian_packet(grid, center, opts.packet_width * h, k0);
  return frequency_localize(packet, SpectralOperator::flat(grid), cut, h);
}

int scaling_points(const CutoffFunction& cut, double h, double box_length, int max_points) {
  const double k_max = std::sqrt(cut.support().hi) / h;
  const double need = 1.25 * k_max * box_length / kPi;
  int n = 64;
  while (n < need) n *= 2;
  if (n > max_points)
    throw ResolutionError("h = " + std::to_string(h) + " needs at least " + std::to_string(n) +
                          " points per axis (limit " + std::to_string(max_points) + ")");
  return n;
}

ScalingStudy measure_semiclassical_scaling(double sigma, const AdmissiblePair& pair, const CutoffFunction& cut,
                                           const std::vector<double>& hs, double t0, const ScalingOptions& opts) {
  check_sigma(sigma);
  check_sweep(pair, hs);
  if (!(t0 > 0.0)) throw InvalidArgument("t0 must be positive");
  auto study = sweep(pair, cut, hs, opts, [&](const StateField& u0, const SpectralOperator& op, double h, int& nt) {
    const auto times = symmetric(graded_times(opts.first_step * h, t0, opts.growth, opts.max_steps));
    nt = static_cast<int>(times.size());
    const auto omega = [&](double lambda) { return std::pow(h * h * lambda, 0.5 * sigma) / h; };
    return time_norm(times, spatial_norms(u0, op, omega, times, pair.q), pair.p);
  });
  study.bound = -(0.5 * pair.d - pair.d / pair.q - 1.0 / pair.p);
  return study;
}

ScalingStudy measure_unscaled_scaling(double sigma, const AdmissiblePair& pair, const CutoffFunction& cut,
                                      const std::vector<double>& hs, const Interval& I, const ScalingOptions& opts) {
  check_sigma(sigma);
  check_sweep(pair, hs);
  if (!(I.hi > I.lo)) throw InvalidArgument("time interval must have positive length");
  auto study = sweep(pair, cut, hs, opts, [&](const StateField& u0, const SpectralOperator& op, double h, int& nt) {
    // Natural time scale of a packet at frequency 1/h: h^sigma.
    auto times = graded_times(opts.first_step * std::pow(h, sigma), I.hi - I.lo, opts.growth, opts.max_steps);
    for (double& t : times) t += I.lo;
    nt = static_cast<int>(times.size());
    const auto omega = [&](double lambda) { return std::pow(lambda, 0.5 * sigma); };
    return time_norm(times, spatial_norms(u0, op, omega, times, pair.q), pair.p);
  });
  study.bound = -(pair.gamma + pair.loss);
  return study;
}

ScalingIdentity scaling_identity(const StateField& v, const SpectralOperator& op, double sigma, double h, double p,
                                 double q, const std::vector<double>& times) {
  check_sigma(sigma);
  if (!(h > 0.0)) throw InvalidArgument("h must be positive");
  const double scale = std::pow(h, sigma - 1.0);
  std::vector<double> unscaled_times;
  unscaled_times.reserve(times.size());
  for (double t : times) unscaled_times.push_back(scale * t);
  const auto plain = [&](double lambda) { return std::pow(lambda, 0.5 * sigma); };
  const auto semi = [&](double lambda) { return std::pow(h * h * lambda, 0.5 * sigma) / h; };
  ScalingIdentity out;
  out.unscaled = time_norm(unscaled_times, spatial_norms(v, op, plain, unscaled_times, q), p);
  const double factor = std::isinf(p) ? 1.0 : std::pow(h, (sigma - 1.0) / p);
  out.semiclassical = factor * time_norm(times, spatial_norms(v, op, semi, times, q), p);
  return out;
}

}  // namespace fracwkb
