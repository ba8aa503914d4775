#include "fracwkb/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <fftw3.h>

#include <Eigen/Eigenvalues>

#include "fracwkb/error.hpp"

namespace fracwkb {

namespace {

int signed_mode(int j, int n) { return j < (n + 1) / 2 ? j : j - n; }

std::vector<int> axis_indices(std::size_t i, int dim, int n) {
  std::vector<int> idx(dim);
  for (int a = dim - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(i % n);
    i /= n;
  }
  return idx;
}

// (-1)^{sum of signed modes}: converts DFT coefficients (origin at the first
// grid point) to coefficients against true positions (origin at the box center).
CVector center_shift(const PeriodicGrid& g, CVector c) {
  for (std::size_t i = 0; i < g.size(); ++i) {
    int s = 0;
    for (int m : axis_indices(i, g.dim(), g.n())) s += signed_mode(m, g.n());
    if (s % 2 != 0) c(static_cast<Eigen::Index>(i)) = -c(static_cast<Eigen::Index>(i));
  }
  return c;
}

CVector run_fft(const PeriodicGrid& g, const CVector& in, int sign) {
  CVector out = in;
  std::vector<int> dims(g.dim(), g.n());
  auto* data = reinterpret_cast<fftw_complex*>(out.data());
  fftw_plan plan = fftw_plan_dft(g.dim(), dims.data(), data, data, sign, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  return out;
}

void require_same_grid(const StateField& a, const StateField& b) {
  if (!(a.grid() == b.grid())) throw InvalidArgument("state fields live on different grids");
}

}  // namespace

PeriodicGrid::PeriodicGrid(int dim, int n, double box_length) : dim_(dim), n_(n), L_(box_length) {
  if (dim < 1 || dim > kMaxDim) throw InvalidArgument("grid dimension must be in [1, 3]");
  if (n < 2) throw InvalidArgument("grid needs at least 2 points per axis");
  if (!(box_length > 0.0) || !std::isfinite(box_length)) throw InvalidArgument("box length must be positive");
  size_ = 1;
  for (int a = 0; a < dim; ++a) size_ *= static_cast<std::size_t>(n);
  k2_.resize(size_);
  for (std::size_t i = 0; i < size_; ++i) k2_[i] = wavevector(i).squaredNorm();
}

double PeriodicGrid::wavenumber(int j) const { return 2.0 * kPi / L_ * signed_mode(j, n_); }

Vec PeriodicGrid::point(std::size_t i) const {
  const auto idx = axis_indices(i, dim_, n_);
  Vec x(dim_);
  for (int a = 0; a < dim_; ++a) x(a) = coordinate(idx[a]);
  return x;
}

Vec PeriodicGrid::wavevector(std::size_t i) const {
  const auto idx = axis_indices(i, dim_, n_);
  Vec k(dim_);
  for (int a = 0; a < dim_; ++a) k(a) = wavenumber(idx[a]);
  return k;
}

CVector fft_forward(const PeriodicGrid& grid, const CVector& in) { return run_fft(grid, in, FFTW_FORWARD); }
CVector fft_inverse(const PeriodicGrid& grid, const CVector& in) { return run_fft(grid, in, FFTW_BACKWARD); }

StateField::StateField(PeriodicGrid grid)
    : grid_(std::move(grid)), values_(CVector::Zero(static_cast<Eigen::Index>(grid_.size()))) {}

StateField::StateField(PeriodicGrid grid, CVector values) : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != static_cast<Eigen::Index>(grid_.size()))
    throw InvalidArgument("state values do not match the grid size");
}

StateField StateField::from_fourier(PeriodicGrid grid, const CVector& coefficients) {
  if (coefficients.size() != static_cast<Eigen::Index>(grid.size()))
    throw InvalidArgument("coefficient count does not match the grid size");
  CVector v = fft_inverse(grid, center_shift(grid, coefficients));
  StateField s(grid, std::move(v));
  s.fourier_ = coefficients;
  return s;
}

CVector& StateField::mutable_values() {
  fourier_.reset();
  return values_;
}

const CVector& StateField::fourier() const {
  if (!fourier_) {
    fourier_ = center_shift(grid_, fft_forward(grid_, values_)) / static_cast<double>(grid_.size());
  }
  return *fourier_;
}

double StateField::l2_norm() const { return std::sqrt(values_.squaredNorm() * grid_.cell_volume()); }

double StateField::sup_norm() const { return values_.size() ? values_.cwiseAbs().maxCoeff() : 0.0; }

StateField& StateField::operator+=(const StateField& o) {
  require_same_grid(*this, o);
  mutable_values() += o.values_;
  return *this;
}

StateField& StateField::operator-=(const StateField& o) {
  require_same_grid(*this, o);
  mutable_values() -= o.values_;
  return *this;
}

StateField& StateField::operator*=(Complex s) {
  mutable_values() *= s;
  return *this;
}

SpectralOperator SpectralOperator::flat(const PeriodicGrid& grid) {
  SpectralOperator op(Kind::flat, grid);
  op.eigenvalues_ = Eigen::Map<const RVector>(grid.k_squared().data(), static_cast<Eigen::Index>(grid.size()));
  op.weight_ = RVector::Ones(static_cast<Eigen::Index>(grid.size()));
  return op;
}

SpectralOperator SpectralOperator::eig(const PeriodicGrid& grid, RVector eigenvalues,
                                       Eigen::MatrixXd eigenvectors, RVector weight) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  if (eigenvalues.size() != n || eigenvectors.rows() != n || eigenvectors.cols() != n || weight.size() != n)
    throw InvalidArgument("eigen data does not match the grid size");
  SpectralOperator op(Kind::eig, grid);
  op.eigenvalues_ = std::move(eigenvalues);
  op.eigenvectors_ = std::move(eigenvectors);
  op.weight_ = std::move(weight);
  return op;
}

CVector SpectralOperator::coefficients(const StateField& u) const {
  if (!(u.grid() == grid_)) throw InvalidArgument("state and operator grids differ");
  if (kind_ == Kind::flat) return u.fourier() * std::sqrt(std::pow(grid_.box_length(), grid_.dim()));
  const CVector weighted = (weight_.cast<Complex>().array() * u.values().array()).matrix() * grid_.cell_volume();
  return eigenvectors_.transpose().cast<Complex>() * weighted;
}

StateField SpectralOperator::synthesize(const CVector& c) const {
  if (kind_ == Kind::flat)
    return StateField::from_fourier(grid_, c / std::sqrt(std::pow(grid_.box_length(), grid_.dim())));
  return StateField(grid_, eigenvectors_.cast<Complex>() * c);
}

StateField SpectralOperator::apply(const std::function<Complex(double)>& f, const StateField& u) const {
  CVector c = coefficients(u);
  for (Eigen::Index j = 0; j < c.size(); ++j) c(j) *= f(eigenvalues_(j));
  return synthesize(c);
}

double SpectralOperator::l2_norm(const StateField& u) const {
  if (kind_ == Kind::flat) return u.l2_norm();
  return std::sqrt((weight_.array() * u.values().array().abs2()).sum() * grid_.cell_volume());
}

StateField propagate(const StateField& u0, const SpectralOperator& op, double sigma, double t,
                     std::optional<double> h) {
  if (!(sigma > 0.0) || sigma == 1.0 || !std::isfinite(sigma))
    throw InvalidArgument("sigma must lie in (0, inf) minus {1}");
  if (t == 0.0) return u0;
  const double hh = h.value_or(1.0);
  if (!(hh > 0.0)) throw InvalidArgument("semiclassical parameter must be positive");
  return op.apply(
      [&](double lambda) {
        const double freq = std::pow(hh * hh * std::max(lambda, 0.0), 0.5 * sigma) / hh;
        return std::polar(1.0, t * freq);
      },
      u0);
}

StateField frequency_localize(const StateField& u0, const SpectralOperator& op,
                              const CutoffFunction& cut, double h) {
  return op.apply([&](double lambda) { return Complex(cut(h * h * lambda), 0.0); }, u0);
}

double sobolev_norm(const StateField& u, double gamma, const SpectralOperator& op) {
  const CVector c = op.coefficients(u);
  double s = 0.0;
  for (Eigen::Index j = 0; j < c.size(); ++j)
    s += std::pow(1.0 + std::max(op.eigenvalues()(j), 0.0), gamma) * std::norm(c(j));
  return std::sqrt(s);
}

double lq_norm(const StateField& u, double q) {
  if (!(q >= 1.0)) throw InvalidArgument("q must be >= 1");
  if (std::isinf(q)) return u.sup_norm();
  return std::pow(u.values().array().abs().pow(q).sum() * u.grid().cell_volume(), 1.0 / q);
}

double lp_lq_norm(const Trajectory& traj, double p, double q) {
  if (traj.states.empty()) throw InvalidArgument("empty trajectory");
  if (traj.states.size() != traj.times.size()) throw InvalidArgument("times and states differ in length");
  if (!(p >= 1.0) || !(q >= 1.0)) throw InvalidArgument("exponents must be >= 1");
  std::vector<double> spatial;
  spatial.reserve(traj.states.size());
  for (const auto& s : traj.states) spatial.push_back(lq_norm(s, q));
  if (std::isinf(p)) return *std::max_element(spatial.begin(), spatial.end());
  if (traj.states.size() == 1) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 1; i < spatial.size(); ++i)
    acc += 0.5 * (traj.times[i] - traj.times[i - 1]) * (std::pow(spatial[i], p) + std::pow(spatial[i - 1], p));
  return std::pow(acc, 1.0 / p);
}

SpectralOperator discretize_P_1d(const MetricField& m, int n_points) {
  if (m.dim() != 1) throw InvalidArgument("eigen discretization is one-dimensional");
  if (n_points % 2 == 0 || n_points < 3)
    throw InvalidArgument("eigen discretization needs an odd point count (even counts carry a spurious Nyquist mode)");
  const PeriodicGrid grid(1, n_points, m.box_length());
  const int n = n_points;
  const double dx = grid.spacing();

  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  const double scale = 2.0 * kPi / grid.box_length();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) {
        const int k = i - j;
        D(i, j) = scale * 0.5 * ((k % 2 == 0) ? 1.0 : -1.0) / std::sin(kPi * k / n);
      }

  RVector w(n), c(n);
  for (int i = 0; i < n; ++i) {
    const Vec x = vec1(grid.coordinate(i));
    c(i) = m.inverse_metric(x)(0, 0);
    w(i) = m.volume_density(x);
  }
  // P = -W^{-1} D (C W) D, conjugated by W^{1/2}.
  const RVector ws = w.cwiseSqrt();
  const Eigen::MatrixXd P = -(w.cwiseInverse().asDiagonal() * D * (c.cwiseProduct(w)).asDiagonal() * D);
  Eigen::MatrixXd A = ws.asDiagonal() * P * ws.cwiseInverse().asDiagonal();
  const double amax = A.cwiseAbs().maxCoeff();
  const double asym = (A - A.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-8 * amax) {
    std::ostringstream os;
    os << "weighted operator is not symmetric (relative asymmetry " << asym / amax << ")";
    throw AssemblyError(os.str());
  }
  A = 0.5 * (A + A.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  if (es.info() != Eigen::Success) throw AssemblyError("eigendecomposition failed");
  RVector lambda = es.eigenvalues();
  const double lmax = lambda.maxCoeff();
  for (int j = 0; j < n; ++j) {
    if (lambda(j) < -1e-10 * lmax) throw AssemblyError("discretized operator has a negative eigenvalue");
    lambda(j) = std::max(lambda(j), 0.0);
  }
  Eigen::MatrixXd E = ws.cwiseInverse().asDiagonal() * es.eigenvectors() / std::sqrt(dx);
  for (int j = 0; j < n; ++j) {
    Eigen::Index imax;
    E.col(j).cwiseAbs().maxCoeff(&imax);
    if (E(imax, j) < 0.0) E.col(j) = -E.col(j);
  }
  return SpectralOperator::eig(grid, std::move(lambda), std::move(E), std::move(w));
}

std::size_t kernel_dimension(const SpectralOperator& op) {
  const RVector& l = op.eigenvalues();
  const double thr = 1e-8 * l.maxCoeff();
  std::size_t zero = 0;
  double next = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < l.size(); ++j) {
    if (l(j) < thr)
      ++zero;
    else
      next = std::min(next, l(j));
  }
  if (zero == 0) throw SpectralGapError("no eigenvalue below the kernel threshold");
  if (next < 100.0 * thr) {
    std::ostringstream os;
    os << "kernel not separated from the spectrum: smallest nonzero eigenvalue " << next
       << " vs threshold " << thr;
    throw SpectralGapError(os.str());
  }
  return zero;
}

StateField kernel_projection(const SpectralOperator& op, const StateField& u) {
  kernel_dimension(op);
  const RVector& l = op.eigenvalues();
  const double thr = 1e-8 * l.maxCoeff();
  CVector c = op.coefficients(u);
  for (Eigen::Index j = 0; j < c.size(); ++j)
    if (l(j) >= thr) c(j) = 0.0;
  return op.synthesize(c);
}

StateField littlewood_paley_reconstruct(const StateField& u, const SpectralOperator& op,
                                        const LittlewoodPaley& lp) {
  return op.apply([&](double lambda) { return Complex(lp.partial_sum(lambda), 0.0); }, u);
}

double almost_orthogonality_ratio(const StateField& u, const SpectralOperator& op,
                                  const LittlewoodPaley& lp) {
  const CVector c = op.coefficients(u);
  double num = 0.0, den = 0.0;
  for (Eigen::Index j = 0; j < c.size(); ++j) {
    const double lambda = op.eigenvalues()(j);
    double s = std::pow(lp.phi0(lambda), 2);
    double scale = 1.0;
    for (int k = 1; k <= lp.k_max(); ++k) {
      scale *= 0.25;
      s += std::pow(lp.phi(scale * lambda), 2);
    }
    num += s * std::norm(c(j));
    den += std::norm(c(j));
  }
  return den > 0.0 ? num / den : 0.0;
}

double bernstein_norm(const SpectralOperator& op, const CutoffFunction& cut, double h) {
  if (op.kind() != SpectralOperator::Kind::flat) throw InvalidArgument("bernstein_norm needs the flat operator");
  double s = 0.0;
  for (Eigen::Index j = 0; j < op.eigenvalues().size(); ++j) s += std::pow(cut(h * h * op.eigenvalues()(j)), 2);
  return std::sqrt(s) / std::pow(op.grid().box_length(), 0.5 * op.grid().dim());
}

StateField gaussian_packet(const PeriodicGrid& grid, const Vec& center, double width, const Vec& k0) {
  CVector v(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec x = grid.point(i);
    // Distance measured on the torus so the packet is periodic.
    Vec r = x - center;
    for (int a = 0; a < grid.dim(); ++a) r(a) -= grid.box_length() * std::round(r(a) / grid.box_length());
    v(static_cast<Eigen::Index>(i)) = std::exp(-r.squaredNorm() / (2.0 * width * width)) * std::polar(1.0, k0.dot(x));
  }
  return StateField(grid, std::move(v));
}

StateField random_band_limited(const PeriodicGrid& grid, double k_max, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  CVector c = CVector::Zero(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (grid.k_squared()[i] <= k_max * k_max) c(static_cast<Eigen::Index>(i)) = Complex(n01(rng), n01(rng));
  return StateField::from_fourier(grid, c);
}

}  // namespace fracwkb
