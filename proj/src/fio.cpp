#include "fracwkb/fio.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "fracwkb/error.hpp"

namespace fracwkb {

namespace {

constexpr double kSkip = 1e-15;

int signed_mode(int j, int n) { return j < (n + 1) / 2 ? j : j - n; }

Complex eval_trig(const std::vector<Complex>& hat, const PeriodicGrid& grid, double x) {
  Complex sum = 0.0;
  for (int j = 0; j < grid.n(); ++j) sum += hat[j] * std::polar(1.0, grid.wavenumber(j) * x);
  return sum;
}

}  // namespace

SampledPhase::SampledPhase(const RealSymbol& q0, double t, double box_length, const FioOptions& opts)
    : t_(t), L_(box_length), band_(opts.band), nc_(opts.chebyshev_nodes),
      nx_(q0.x_independent() ? 1 : opts.coarse_points), min_kernel_nodes_(std::max(2, opts.min_kernel_nodes)),
      table_({}, {}, {}) {
  if (q0.dim() != 1) throw InvalidArgument("sampled FIO phases are one-dimensional");
  if (!(band_.lo > 0.0) || !(band_.hi > band_.lo)) throw InvalidArgument("frequency band must satisfy 0 < lo < hi");
  if (nc_ < 4) throw InvalidArgument("need at least 4 Chebyshev nodes");
  if (nx_ < 1 || nx_ % 2 == 0) throw InvalidArgument("coarse_points must be odd");
  if (!(L_ > 0.0)) throw InvalidArgument("box length must be positive");

  for (int c = 0; c < nc_; ++c) {
    nodes_.push_back(std::cos(kPi * c / (nc_ - 1)));
    double w = (c % 2 == 0) ? 1.0 : -1.0;
    if (c == 0 || c == nc_ - 1) w *= 0.5;
    weights_.push_back(w);
  }
  const double mid = 0.5 * (band_.lo + band_.hi), half = 0.5 * (band_.hi - band_.lo);
  std::vector<Vec> xis;
  for (int b = 0; b < 2; ++b)
    for (int c = 0; c < nc_; ++c) xis.push_back(vec1((b == 0 ? -1.0 : 1.0) * (mid + half * nodes_[c])));
  std::vector<Vec> xs;
  for (int j = 0; j < nx_; ++j) xs.push_back(vec1(nx_ == 1 ? 0.0 : -0.5 * L_ + L_ * j / nx_));
  table_ = build_phase(q0, {t}, xs, xis, opts.phase);

  const int nn = 2 * nc_;
  wd_.assign(nn, std::vector<Complex>(nx_));
  gh_ = f_ = wd_;
  for (int k = 0; k < nn; ++k)
    for (int j = 0; j < nx_; ++j) {
      const auto& n = table_.node(0, j, k);
      const double x = xs[j](0), xi = xis[k](0);
      const double d = n.Y(0) - x;
      max_disp_ = std::max(max_disp_, std::abs(d));
      wd_[k][j] = Complex(n.S - x * xi, d);
      gh_[k][j] = Complex(n.grad_x(0), n.hess_xx(0, 0));
      f_[k][j] = n.log_amplitude;
    }
  auto hat = [&](const std::vector<Complex>& v) {
    if (nx_ == 1) return v;
    const PeriodicGrid coarse(1, nx_, L_);
    CVector vals(nx_);
    for (int j = 0; j < nx_; ++j) vals(j) = v[j];
    const CVector c = StateField(coarse, vals).fourier();
    return std::vector<Complex>(c.data(), c.data() + nx_);
  };
  for (int k = 0; k < nn; ++k) {
    wd_hat_.push_back(hat(wd_[k]));
    gh_hat_.push_back(hat(gh_[k]));
    f_hat_.push_back(hat(f_[k]));
  }
}

std::vector<double> SampledPhase::barycentric(double xi, int& band_index) const {
  band_index = xi < 0.0 ? 0 : 1;
  const double mid = 0.5 * (band_.lo + band_.hi), half = 0.5 * (band_.hi - band_.lo);
  const double s = (std::abs(xi) - mid) / half;
  if (std::abs(s) > 1.0 + 1e-12) {
    std::ostringstream msg;
    msg << "frequency " << xi << " lies outside the sampled band [" << band_.lo << ", " << band_.hi << "]";
    throw InvalidArgument(msg.str());
  }
  std::vector<double> beta(nc_, 0.0);
  double total = 0.0;
  for (int c = 0; c < nc_; ++c) {
    if (s == nodes_[c]) {
      std::fill(beta.begin(), beta.end(), 0.0);
      beta[c] = 1.0;
      return beta;
    }
    beta[c] = weights_[c] / (s - nodes_[c]);
    total += beta[c];
  }
  for (double& b : beta) b /= total;
  return beta;
}

SampledPhase::Slice SampledPhase::slice(double x) const {
  Slice s;
  if (nx_ == 1) {
    for (int k = 0; k < 2 * nc_; ++k) {
      s.wd.push_back(wd_hat_[k][0]);
      s.gh.push_back(gh_hat_[k][0]);
      s.f.push_back(f_hat_[k][0]);
    }
    return s;
  }
  const PeriodicGrid coarse(1, nx_, L_);
  for (int k = 0; k < 2 * nc_; ++k) {
    s.wd.push_back(eval_trig(wd_hat_[k], coarse, x));
    s.gh.push_back(eval_trig(gh_hat_[k], coarse, x));
    s.f.push_back(eval_trig(f_hat_[k], coarse, x));
  }
  return s;
}

PhasePoint SampledPhase::interpolate(const Slice& s, double x, double xi) const {
  int b = 0;
  const auto beta = barycentric(xi, b);
  Complex wd = 0.0, gh = 0.0, f = 0.0;
  for (int c = 0; c < nc_; ++c) {
    const int k = b * nc_ + c;
    wd += beta[c] * s.wd[k];
    gh += beta[c] * s.gh[k];
    f += beta[c] * s.f[k];
  }
  PhasePoint p;
  p.W = wd.real();
  p.Y = vec1(x + wd.imag());
  p.grad_x = vec1(gh.real());
  p.hess_xx = Mat::Constant(1, 1, gh.imag());
  p.log_amplitude = f;
  return p;
}

void SampledPhase::column(const PeriodicGrid& grid, double xi, std::vector<PhasePoint>& out) const {
  int b = 0;
  const auto beta = barycentric(xi, b);
  const int n = grid.n();
  out.resize(n);
  auto combine = [&](const std::vector<std::vector<Complex>>& hats) {
    std::vector<Complex> c(nx_, 0.0);
    for (int q = 0; q < nc_; ++q) {
      if (beta[q] == 0.0) continue;
      const auto& h = hats[b * nc_ + q];
      for (int j = 0; j < nx_; ++j) c[j] += beta[q] * h[j];
    }
    return c;
  };
  auto to_fine = [&](const std::vector<Complex>& c) {
    if (nx_ == 1) return CVector(CVector::Constant(n, c[0]));
    CVector fine = CVector::Zero(n);
    for (int j = 0; j < nx_; ++j) {
      const int m = signed_mode(j, nx_);
      fine(((m % n) + n) % n) += c[j];
    }
    return StateField::from_fourier(grid, fine).values();
  };
  const CVector wd = to_fine(combine(wd_hat_));
  const CVector gh = to_fine(combine(gh_hat_));
  const CVector f = to_fine(combine(f_hat_));
  for (int i = 0; i < n; ++i) {
    auto& p = out[i];
    p.W = wd(i).real();
    p.Y = vec1(grid.coordinate(i) + wd(i).imag());
    p.grad_x = vec1(gh(i).real());
    p.hess_xx = Mat::Constant(1, 1, gh(i).imag());
    p.log_amplitude = f(i);
  }
}

int required_points(const SampledPhase& phase, double h) {
  return static_cast<int>(std::ceil(1.25 * phase.band().hi * phase.box_length() / (kPi * h)));
}

namespace {

void check_grid(const SampledPhase& phase, const PeriodicGrid& grid, double h) {
  if (grid.dim() != 1) throw InvalidArgument("gridded FIO evaluation is one-dimensional");
  if (std::abs(grid.box_length() - phase.box_length()) > 1e-12 * phase.box_length())
    throw InvalidArgument("state and phase live on different boxes");
  if (!(h > 0.0)) throw InvalidArgument("h must be positive");
  const int need = required_points(phase, h);
  if (grid.n() < need) {
    std::ostringstream msg;
    msg << "grid of " << grid.n() << " points cannot resolve frequencies up to " << phase.band().hi / h
        << " at h = " << h << "; need at least " << need << " points";
    throw ResolutionError(msg.str());
  }
  if (phase.max_displacement() > phase.box_length() / 8) {
    std::ostringstream msg;
    msg << "phase displacement " << phase.max_displacement() << " exceeds L/8 = " << phase.box_length() / 8
        << "; fewer than 8 mode samples per oscillation in xi";
    throw ResolutionError(msg.str());
  }
}

bool in_band(const Interval& band, double xi) {
  const double a = std::abs(xi);
  return a >= band.lo && a <= band.hi;
}

// Calls fn(j, xi, column value vector) for every in-band mode j.
template <typename Fn>
void for_each_column(const SampledPhase& phase, const AmplitudeFn& amp, const PeriodicGrid& grid, double h,
                     const std::vector<bool>& use, Fn&& fn) {
  std::vector<PhasePoint> pts;
  CVector col(grid.n());
  for (int j = 0; j < grid.n(); ++j) {
    const double xi = h * grid.wavenumber(j);
    if (!in_band(phase.band(), xi) || !use[j]) continue;
    phase.column(grid, xi, pts);
    const Vec k = vec1(xi);
    for (int i = 0; i < grid.n(); ++i) {
      const double x = grid.coordinate(i);
      col(i) = std::polar(1.0, (x * xi + pts[i].W) / h) * amp(vec1(x), k, pts[i], h);
    }
    fn(j, col);
  }
}

std::vector<bool> significant(const CVector& c) {
  const double cmax = c.size() ? c.cwiseAbs().maxCoeff() : 0.0;
  std::vector<bool> use(c.size());
  for (int j = 0; j < c.size(); ++j) use[j] = std::abs(c(j)) > kSkip * cmax;
  return use;
}

}  // namespace

StateField apply_fio(const SampledPhase& phase, const AmplitudeFn& amp, const StateField& u0, double h) {
  const auto& grid = u0.grid();
  check_grid(phase, grid, h);
  const CVector& c = u0.fourier();
  CVector out = CVector::Zero(grid.n());
  for_each_column(phase, amp, grid, h, significant(c), [&](int j, const CVector& col) { out += c(j) * col; });
  return StateField(grid, out);
}

StateField apply_pseudo(const SymbolFunction& a, const StateField& u0, double h, const Interval& band) {
  const auto& grid = u0.grid();
  if (grid.dim() != 1) throw InvalidArgument("gridded quantization is one-dimensional");
  const CVector& c = u0.fourier();
  const auto use = significant(c);
  CVector out = CVector::Zero(grid.n());
  for (int j = 0; j < grid.n(); ++j) {
    const double k = grid.wavenumber(j), xi = h * k;
    if (!in_band(band, xi) || !use[j]) continue;
    const Vec kv = vec1(xi);
    for (int i = 0; i < grid.n(); ++i) {
      const double x = grid.coordinate(i);
      out(i) += std::polar(1.0, k * x) * a(vec1(x), kv) * c(j);
    }
  }
  return StateField(grid, out);
}

Eigen::MatrixXcd fio_matrix(const SampledPhase& phase, const AmplitudeFn& amp, const PeriodicGrid& grid, double h) {
  check_grid(phase, grid, h);
  std::vector<CVector> cols;
  for_each_column(phase, amp, grid, h, std::vector<bool>(grid.n(), true),
                  [&](int, const CVector& col) { cols.push_back(col); });
  Eigen::MatrixXcd m(grid.n(), cols.size());
  for (std::size_t k = 0; k < cols.size(); ++k) m.col(k) = cols[k];
  return m;
}

double operator_norm(const SampledPhase& phase, const AmplitudeFn& amp, const PeriodicGrid& grid, double h,
                     int iterations, std::uint64_t seed) {
  const auto m = fio_matrix(phase, amp, grid, h);
  if (m.cols() == 0) return 0.0;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  CVector v(m.cols());
  for (int k = 0; k < v.size(); ++k) v(k) = Complex(g(rng), g(rng));
  v.normalize();
  double s2 = 0.0;
  for (int it = 0; it < iterations; ++it) {
    CVector w = m.adjoint() * (m * v);
    s2 = w.norm();
    if (s2 == 0.0) return 0.0;
    v = w / s2;
  }
  // ||J u||^2 = dx sum |M c|^2 and ||u||^2 = L sum |c|^2.
  return std::sqrt(s2 * grid.spacing() / grid.box_length());
}

namespace {

// out_j = sum_m g_m exp(-i (y0 + j dy)(xi0 + m dxi) / h), j < ny, by Bluestein's
// chirp-z transform: jm = (j^2 + m^2 - (j - m)^2) / 2 turns the sum into a
// convolution evaluated with FFTs.
Eigen::VectorXcd chirp_sum(const std::vector<Complex>& g, double xi0, double dxi, double y0, double dy, int ny,
                           double h) {
  const int m = static_cast<int>(g.size());
  const double alpha = dy * dxi / h;
  int size = 1;
  while (size < m + ny - 1) size *= 2;
  const PeriodicGrid work(1, size, 1.0);
  auto chirp = [&](long long k, double sign) {
    return std::polar(1.0, sign * 0.5 * alpha * static_cast<double>(k * k));
  };
  CVector a = CVector::Zero(size), b = CVector::Zero(size);
  for (int k = 0; k < m; ++k) a(k) = g[k] * std::polar(1.0, -y0 * k * dxi / h) * chirp(k, -1.0);
  for (int k = 0; k < ny; ++k) b(k) = chirp(k, 1.0);
  for (int k = 1; k < m; ++k) b(size - k) = chirp(k, 1.0);
  const CVector conv = fft_inverse(work, fft_forward(work, a).cwiseProduct(fft_forward(work, b))) / size;
  Eigen::VectorXcd out(ny);
  for (int j = 0; j < ny; ++j) out(j) = conv(j) * chirp(j, -1.0) * std::polar(1.0, -(y0 + j * dy) * xi0 / h);
  return out;
}

}  // namespace

KernelGrid kernel(const SampledPhase& phase, const AmplitudeFn& amp, double h, const std::vector<double>& xs,
                  double y_lo, double y_hi, int ny) {
  if (!(h > 0.0)) throw InvalidArgument("h must be positive");
  if (ny < 2 || !(y_hi > y_lo)) throw InvalidArgument("y-grid needs at least two increasing points");
  KernelGrid out;
  out.h = h;
  out.t = phase.time();
  out.xs = xs;
  const double dy = (y_hi - y_lo) / (ny - 1);
  for (int j = 0; j < ny; ++j) out.ys.push_back(y_lo + dy * j);
  out.values = Eigen::MatrixXcd::Zero(xs.size(), ny);
  const Interval band = phase.band();
  for (std::size_t r = 0; r < xs.size(); ++r) {
    const double x = xs[r];
    const auto s = phase.slice(x);
    const double reach = std::max(std::abs(y_lo - x), std::abs(y_hi - x)) + phase.max_displacement();
    const double dxi_max = 2 * kPi * h / (8 * std::max(reach, 1e-300));
    const int nodes = std::max(phase.min_kernel_nodes(),
                               static_cast<int>(std::ceil((band.hi - band.lo) / dxi_max)) + 1);
    const double dxi = (band.hi - band.lo) / (nodes - 1);
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(ny);
    for (int b = 0; b < 2; ++b) {
      const double sign = b == 0 ? -1.0 : 1.0;
      std::vector<Complex> g(nodes);
      for (int k = 0; k < nodes; ++k) {
        const double xi = sign * (band.lo + dxi * k);
        const auto p = phase.interpolate(s, x, xi);
        const double w = (k == 0 || k == nodes - 1) ? 0.5 : 1.0;
        g[k] = w * dxi * std::polar(1.0, (x * xi + p.W) / h) * amp(vec1(x), vec1(xi), p, h);
      }
      acc += chirp_sum(g, sign * band.lo, sign * dxi, y_lo, dy, ny, h);
    }
    out.values.row(r) = acc.transpose() / (2 * kPi * h);
  }
  return out;
}

double kernel_sup(const SampledPhase& phase, const AmplitudeFn& amp, double h, double x) {
  const double reach = phase.max_displacement() + 30 * h;
  int ny = static_cast<int>(std::ceil(2 * reach / (0.25 * h))) + 1;
  double previous = kernel(phase, amp, h, {x}, x - reach, x + reach, ny).sup();
  for (int round = 0; round < 6; ++round) {
    ny = 2 * ny - 1;
    const double current = kernel(phase, amp, h, {x}, x - reach, x + reach, ny).sup();
    if (std::abs(current - previous) < 0.01 * current) return current;
    previous = current;
  }
  return previous;
}

DispersiveFit dispersive_fit(const RealSymbol& q0, const RealSymbol& a, double h,
                             const std::vector<double>& t_samples, double t0, double box_length,
                             const FioOptions& opts, const std::vector<double>& xs) {
  std::vector<double> ts;
  for (double t : t_samples)
    if (t >= h && t <= t0) ts.push_back(t);
  if (ts.size() < 4) {
    std::ostringstream msg;
    msg << "dispersive fit needs at least 4 samples in [h, t0] = [" << h << ", " << t0 << "], got " << ts.size();
    throw InsufficientData(msg.str());
  }
  DispersiveFit out;
  std::vector<double> lambdas, sups;
  for (double t : ts) {
    const SampledPhase phase(q0, t, box_length, opts);
    const auto amp = transported_amplitude(a, q0, t, 1);
    double sup = 0.0;
    for (double x : xs) sup = std::max(sup, kernel_sup(phase, amp, h, x));
    out.samples.push_back({t, t / h, sup});
    lambdas.push_back(t / h);
    sups.push_back(sup);
  }
  out.fit = fit_loglog(lambdas, sups);
  return out;
}

double stationary_phase_peak(const RealSymbol& q0, const RealSymbol& a, double h, double t, const Interval& band,
                             int samples) {
  const double lambda = t / h;
  double best = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double eta = band.lo + (band.hi - band.lo) * i / (samples - 1);
    for (double s : {-1.0, 1.0}) {
      const Vec x = vec1(0.0), k = vec1(s * eta);
      const double curv = std::abs(q0.jet(x, k).hess_xixi(0, 0));
      if (curv == 0.0) continue;
      best = std::max(best, std::abs(a(x, k)) / std::sqrt(curv));
    }
  }
  return std::sqrt(2 * kPi / lambda) * best / (2 * kPi * h);
}

double default_c_large(double sigma, const Interval& band) {
  const double e = sigma - 1.0;
  const double sup = sigma * std::max(std::pow(band.lo, e), std::pow(band.hi, e));
  return 2 * sup + 1;
}

double nonstationary_ratio(const SampledPhase& phase, const AmplitudeFn& amp, const MetricField& m, double h,
                           double x, double c_large) {
  const double t = std::abs(phase.time());
  if (!(t > 0.0)) throw InvalidArgument("non-stationary regime needs t != 0");
  const double scale = 1.0 / std::sqrt(m.inverse_metric(vec1(x))(0, 0));
  const double reach = 1.5 * c_large * t / scale;
  const int ny = static_cast<int>(std::ceil(2 * reach / (0.25 * h))) + 1;
  const auto k = kernel(phase, amp, h, {x}, x - reach, x + reach, ny);
  double far = 0.0, all = 0.0;
  for (int j = 0; j < ny; ++j) {
    const double v = std::abs(k.values(0, j));
    all = std::max(all, v);
    if (scale * std::abs(x - k.ys[j]) / t >= c_large) far = std::max(far, v);
  }
  return all > 0.0 ? far / all : 0.0;
}

StationaryHessian stationary_hessian(const RealSymbol& q0, const MetricField& m, double sigma, double t,
                                     const Vec& x, const Vec& y, const Vec& eta_guess, const PhaseOptions& opts) {
  if (!(std::abs(t) > 0.0)) throw InvalidArgument("stationary point needs t != 0");
  const int d = static_cast<int>(x.size());
  Eigen::SelfAdjointEigenSolver<Mat> es(m.inverse_metric(x));
  const Mat sqrt_g = es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                     es.eigenvectors().transpose();
  const Mat sqrt_g_inv = es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
  Vec xi = sqrt_g * eta_guess;
  StationaryHessian out;
  PhaseNode node;
  for (int it = 0;; ++it) {
    node = phase_at(q0, t, x, xi, opts);
    const Vec r = node.grad_xi - y;
    out.iterations = it;
    if (r.norm() <= 1e-13 * std::max(1.0, y.norm())) break;
    if (it == 50) throw CausticError("no stationary point found for the rescaled phase");
    xi -= node.hess_xixi.fullPivLu().solve(r);
  }
  out.eta = sqrt_g_inv * xi;
  out.hessian = sqrt_g * node.hess_xixi * sqrt_g / t;
  out.det = out.hessian.determinant();
  out.expected = std::pow(sigma, d) * std::abs(sigma - 1.0) * std::pow(out.eta.norm(), (sigma - 2.0) * d);
  return out;
}

RemainderSample remainder_ratio(const RealSymbol& q0, const RealSymbol& a, double sigma, double t, double h,
                                int order, double box_length, const StateFactory& state, const FioOptions& opts) {
  const SampledPhase phase(q0, t, box_length, opts);
  int n = 64;
  while (n < required_points(phase, h)) n *= 2;
  const PeriodicGrid grid(1, n, box_length);
  const StateField u = state(grid, h);
  const StateField j = apply_fio(phase, transported_amplitude(a, q0, t, order), u, h);
  const StateField ref =
      propagate(apply_pseudo(to_complex(a), u, h, opts.band), SpectralOperator::flat(grid), sigma, t, h);
  return {h, n, (ref - j).l2_norm() / u.l2_norm()};
}

RemainderFit remainder_decay(const RealSymbol& q0, const RealSymbol& a, double sigma, double t,
                             const std::vector<double>& hs, int order, double box_length,
                             const StateFactory& state, const FioOptions& opts) {
  RemainderFit out;
  std::vector<double> xs, ys;
  for (double h : hs) {
    out.samples.push_back(remainder_ratio(q0, a, sigma, t, h, order, box_length, state, opts));
    xs.push_back(h);
    ys.push_back(out.samples.back().ratio);
  }
  out.fit = fit_loglog(xs, ys);
  return out;
}

}  // namespace fracwkb
