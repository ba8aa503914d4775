#include "fracwkb/suite.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <random>
#include <sstream>

#include "fracwkb/error.hpp"
#include "fracwkb/fio.hpp"
#include "fracwkb/nlfs.hpp"
#include "fracwkb/strichartz.hpp"

namespace fracwkb {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string brief(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Accepts plain numbers, "inf", and multiples of pi written "4pi" or "4*pi".
double parse_number(const std::string& key, const std::string& raw) {
  std::string s = trim(raw);
  double scale = 1.0;
  if (s.size() >= 2 && s.compare(s.size() - 2, 2, "pi") == 0) {
    scale = kPi;
    s = trim(s.substr(0, s.size() - 2));
    if (!s.empty() && s.back() == '*') s = trim(s.substr(0, s.size() - 1));
    if (s.empty()) s = "1";
  }
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v * scale;
  } catch (const std::exception&) {
    throw ConfigError(key + ": '" + raw + "' is not a number");
  }
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

using Keys = std::vector<ConfigKey>;

Keys common_keys(const std::string& box_length) {
  return {
      {"metric.kind", "flat", "flat or gaussian_bump"},
      {"metric.epsilon", "0.1", "bump height in g = (1 + epsilon exp(-|x|^2)) I"},
      {"box.length", box_length, "periodic box length L (accepts multiples of pi, e.g. 4pi)"},
      {"sigma", "2", "dispersion exponent in (0, inf) without 1"},
      {"d", "1", "spatial dimension"},
      {"cutoff.r1", "0.25", "lower end of the cutoff support"},
      {"cutoff.r2", "4", "upper end of the cutoff support"},
      {"cutoff.plateau", "0.5,2", "interval on which the cutoff equals one"},
      {"cutoff.margin", "2", "widening factor of the cutoff inside q0"},
      {"seed", "1", "seed for random states"},
      {"output.dir", "results", "directory for CSV and report files"},
  };
}

Keys join(Keys a, const Keys& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

Keys nonlinear_keys() {
  return {
      {"box.points_per_dim", "32", "grid points per axis (odd for gaussian_bump)"},
      {"nu", "3", "power of the nonlinearity, > 1"},
      {"mu", "1", "sign of the nonlinearity: 1 defocusing, -1 focusing, 0 linear"},
      {"T", "1", "final time (signed)"},
      {"dt", "0.001", "time step"},
      {"record_every", "10", "steps between monitor samples"},
      {"data.kind", "smooth", "smooth, random or constant"},
      {"data.amplitude", "1", "scale of the initial state"},
      {"data.kmax", "4", "frequency cap for random data"},
  };
}

const std::map<std::string, Keys>& key_tables() {
  static const std::map<std::string, Keys> tables{
      {"phase", join(common_keys("20"),
                     {
                         {"box.points_per_dim", "11", "x samples per axis"},
                         {"x.range", "2.5", "x samples cover [-x.range, x.range]"},
                         {"t.max", "0.5", "time grid covers [-t.max, t.max]"},
                         {"t.steps", "40", "time intervals on each side of 0"},
                         {"flow.dt", "0", "RK4 step; 0 uses t.max / t.steps / 4"},
                         {"xi.values", "0.8,1,1.3", "frequency magnitudes"},
                     })},
      {"kernel", join(common_keys("4pi"),
                      {
                          {"h", "0.015625", "semiclassical parameter"},
                          {"t", "0.125", "kernel time"},
                          {"kernel.x", "0", "kernel row position"},
                          {"kernel.y_points", "401", "y samples in the CSV window"},
                          {"amplitude.plateau", "0.95,1.05", "plateau of the amplitude in the stationary-phase check"},
                          {"nonstationary.lambda", "64", "t / h for the non-stationary check; 0 skips"},
                          {"remainder.order", "2", "parametrix order (1 or 2); 0 skips"},
                          {"remainder.t", "0.25", "time of the remainder check"},
                          {"remainder.h", "0.0625,0.03125,0.015625,0.0078125,0.00390625", "h sweep"},
                          {"remainder.kappa", "2", "x-modulation of the remainder amplitude"},
                      })},
      {"dispersive", join(common_keys("4pi"),
                          {
                              {"h", "0.015625", "semiclassical parameter"},
                              {"t0", "1024", "last kernel time"},
                              {"t.samples", "10", "geometric time samples in [2h, t0]"},
                          })},
      {"strichartz", join(common_keys("4pi"),
                          {
                              {"p", "8", "time exponent (inf allowed)"},
                              {"q", "4", "space exponent"},
                              {"hmin", "0.001953125", "smallest dyadic h"},
                              {"hmax", "0.125", "largest dyadic h"},
                              {"t0", "1", "semiclassical window [-t0, t0]"},
                              {"interval", "0,1", "unscaled time interval"},
                              {"mode", "both", "semiclassical, unscaled or both"},
                              {"time.max_steps", "2000", "cap on time samples per half window"},
                              {"identity.states", "5", "random states for the time-rescaling identity"},
                          })},
      {"nlfs", join(join(common_keys("2pi"), nonlinear_keys()),
                    {
                        {"picard.T", "0.2", "window of the Picard check; 0 skips"},
                        {"continuation.T", "10", "total time of the continuation run; 0 skips"},
                    })},
      {"nlfw", join(join(common_keys("2pi"), nonlinear_keys()),
                    {
                        {"data.velocity", "0.2", "scale of the initial velocity"},
                    })},
      {"audit", join(common_keys("20"),
                     {
                         {"box.points_per_dim", "24", "x samples per axis (coarse table)"},
                         {"x.range", "3", "x samples cover [-x.range, x.range)"},
                         {"t.max", "0.5", "time grid covers [-t.max, t.max]"},
                         {"t.steps", "8", "time intervals on each side of 0 (coarse table)"},
                         {"xi.values", "0.75,1,1.25", "frequency magnitudes"},
                         {"lp.k_max", "6", "dyadic blocks in the Littlewood-Paley check"},
                     })},
  };
  return tables;
}

bool power_of_two(double h) {
  int e = 0;
  return std::frexp(h, &e) == 0.5;
}

void validate_common(const Config& c) {
  const auto& kind = c.text("metric.kind");
  require(kind == "flat" || kind == "gaussian_bump", "metric.kind must be flat or gaussian_bump");
  const double eps = c.number("metric.epsilon");
  require(std::isfinite(eps) && eps > -1.0, "metric.epsilon must be finite and above -1");
  const double L = c.number("box.length");
  require(std::isfinite(L) && L > 0.0, "box.length must be positive");
  const double sigma = c.number("sigma");
  require(std::isfinite(sigma) && sigma > 0.0 && sigma != 1.0, "sigma must lie in (0, inf) minus {1}");
  const int d = c.integer("d");
  require(d >= 1 && d <= kMaxDim, "d must lie in [1, " + std::to_string(kMaxDim) + "]");
  const double r1 = c.number("cutoff.r1"), r2 = c.number("cutoff.r2");
  const auto pl = c.numbers("cutoff.plateau");
  require(pl.size() == 2, "cutoff.plateau needs two numbers");
  require(r1 > 0.0 && r1 < pl[0] && pl[0] < pl[1] && pl[1] < r2 && std::isfinite(r2),
          "cutoff needs 0 < r1 < plateau.lo < plateau.hi < r2");
  require(c.number("cutoff.margin") >= 1.0, "cutoff.margin must be at least 1");
  require(c.integer("seed") >= 0, "seed must be nonnegative");
  require(!c.text("output.dir").empty(), "output.dir must not be empty");
}

void validate_samples(const Config& c, const std::string& key) {
  const auto v = c.numbers(key);
  require(!v.empty(), key + " needs at least one value");
  for (double x : v) require(std::isfinite(x) && x > 0.0, key + " values must be positive");
}

void validate_nonlinear(const Config& c) {
  require(c.number("nu") > 1.0, "nu must exceed 1");
  require(std::isfinite(c.number("mu")), "mu must be finite");
  require(std::isfinite(c.number("T")), "T must be finite");
  const double dt = c.number("dt");
  require(dt > 0.0 && std::isfinite(dt), "dt must be positive");
  require(c.integer("record_every") >= 1, "record_every must be at least 1");
  const auto& kind = c.text("data.kind");
  require(kind == "smooth" || kind == "random" || kind == "constant", "data.kind must be smooth, random or constant");
  require(std::isfinite(c.number("data.amplitude")), "data.amplitude must be finite");
  require(c.number("data.kmax") > 0.0, "data.kmax must be positive");
  const int n = c.integer("box.points_per_dim");
  require(n >= 4, "box.points_per_dim must be at least 4");
  const int d = c.integer("d");
  if (c.text("metric.kind") == "gaussian_bump") {
    require(d == 1, "the variable-metric operator is one-dimensional");
    require(n % 2 == 1, "the variable-metric operator needs an odd box.points_per_dim");
  } else {
    // Same step restriction the solver enforces, checked here up front.
    const double k_max = kPi * (n / 2) * 2.0 / c.number("box.length");
    const double lambda_max = d * k_max * k_max;
    require(dt * std::pow(lambda_max, 0.5 * c.number("sigma")) < 0.5,
            "dt * lambda_max^(sigma/2) must stay below 0.5; reduce dt");
  }
}

void validate_suite(const std::string& suite, const Config& c) {
  validate_common(c);
  const int d = c.integer("d");
  if (suite == "phase" || suite == "audit") {
    require(c.number("t.max") > 0.0, "t.max must be positive");
    require(c.integer("t.steps") >= (suite == "phase" ? 2 : 1), "t.steps is too small");
    require(c.integer("box.points_per_dim") >= 1, "box.points_per_dim must be positive");
    require(c.number("x.range") > 0.0, "x.range must be positive");
    validate_samples(c, "xi.values");
    if (suite == "phase") require(c.number("flow.dt") >= 0.0, "flow.dt must be nonnegative");
    if (suite == "audit") require(c.integer("lp.k_max") >= 1, "lp.k_max must be at least 1");
  } else if (suite == "kernel" || suite == "dispersive") {
    require(d == 1, "the kernel and dispersive suites are one-dimensional");
    const double h = c.number("h");
    require(h > 0.0 && h <= 1.0, "h must lie in (0, 1]");
    if (suite == "kernel") {
      require(c.number("t") > 0.0, "t must be positive");
      require(c.integer("kernel.y_points") >= 3, "kernel.y_points must be at least 3");
      const auto ap = c.numbers("amplitude.plateau");
      require(ap.size() == 2 && c.number("cutoff.r1") < ap[0] && ap[0] < ap[1] && ap[1] < c.number("cutoff.r2"),
              "amplitude.plateau must lie inside the cutoff support");
      require(c.number("nonstationary.lambda") >= 0.0, "nonstationary.lambda must be nonnegative");
      const int order = c.integer("remainder.order");
      require(order >= 0 && order <= 2, "remainder.order must be 0, 1 or 2");
      require(c.number("remainder.t") >= 0.0, "remainder.t must be nonnegative");
      require(c.number("remainder.kappa") >= 0.0, "remainder.kappa must be nonnegative");
      if (order > 0) {
        validate_samples(c, "remainder.h");
        require(c.numbers("remainder.h").size() >= 2, "remainder.h needs at least two values");
      }
    } else {
      require(c.number("t0") > 2.0 * h, "t0 must exceed 2h");
      require(c.integer("t.samples") >= 4, "t.samples must be at least 4");
    }
  } else if (suite == "strichartz") {
    const double p = c.number("p"), q = c.number("q");
    require(classify_pair(p, q, d, c.number("sigma")).valid,
            "(p, q) = (" + brief(p) + ", " + brief(q) + ") is not admissible in d = " + std::to_string(d));
    const double hmin = c.number("hmin"), hmax = c.number("hmax");
    require(hmin > 0.0 && hmin < hmax && hmax <= 1.0, "need 0 < hmin < hmax <= 1");
    require(power_of_two(hmin) && power_of_two(hmax), "hmin and hmax must be powers of two");
    require(c.number("t0") > 0.0, "t0 must be positive");
    const auto I = c.numbers("interval");
    require(I.size() == 2 && I[1] > I[0], "interval needs lo < hi");
    const auto& mode = c.text("mode");
    require(mode == "semiclassical" || mode == "unscaled" || mode == "both",
            "mode must be semiclassical, unscaled or both");
    require(c.integer("time.max_steps") >= 10, "time.max_steps must be at least 10");
    require(c.integer("identity.states") >= 0, "identity.states must be nonnegative");
  } else if (suite == "nlfs" || suite == "nlfw") {
    validate_nonlinear(c);
    if (suite == "nlfs") {
      require(c.number("picard.T") >= 0.0, "picard.T must be nonnegative");
      require(c.number("continuation.T") >= 0.0, "continuation.T must be nonnegative");
    } else {
      require(std::isfinite(c.number("data.velocity")), "data.velocity must be finite");
    }
  }
}

// ---------------------------------------------------------------------------
// Shared builders

std::shared_ptr<const MetricField> make_metric(const Config& c) {
  const int d = c.integer("d");
  const double L = c.number("box.length");
  if (c.text("metric.kind") == "flat") return std::make_shared<const MetricField>(MetricField::flat(d, L));
  return std::make_shared<const MetricField>(MetricField::gaussian_bump(d, L, c.number("metric.epsilon")));
}

bool is_flat(const Config& c) { return c.text("metric.kind") == "flat"; }

CutoffFunction make_cutoff(const Config& c) {
  const auto pl = c.numbers("cutoff.plateau");
  return make_bump(c.number("cutoff.r1"), c.number("cutoff.r2"), {pl[0], pl[1]});
}

RealSymbol make_phase_symbol(const Config& c, std::shared_ptr<const MetricField> m) {
  return make_q0(std::move(m), semiclassical_psi(make_cutoff(c).widened(c.number("cutoff.margin")), c.number("sigma")));
}

// Range of g^{11} over the box for the supported metrics.
Interval metric_range(const Config& c) {
  if (is_flat(c)) return {1.0, 1.0};
  const double eps = c.number("metric.epsilon");
  return {std::min(1.0, 1.0 + eps), std::max(1.0, 1.0 + eps)};
}

FioOptions fio_options(const Config& c) {
  FioOptions o;
  const auto g = metric_range(c);
  o.band = {std::sqrt(c.number("cutoff.r1") / g.hi), std::sqrt(c.number("cutoff.r2") / g.lo)};
  return o;
}

std::vector<double> uniform(double a, double b, int n) {
  std::vector<double> v;
  for (int i = 0; i <= n; ++i) v.push_back(a + (b - a) * i / n);
  return v;
}

// Tensor grid of n points per axis on [lo, hi] (closed) or [lo, hi) (open).
std::vector<Vec> tensor_points(int d, int n, double lo, double hi, bool closed) {
  std::vector<double> axis;
  for (int i = 0; i < n; ++i) {
    const double s = closed ? (n == 1 ? 0.5 : static_cast<double>(i) / (n - 1)) : static_cast<double>(i) / n;
    axis.push_back(lo + (hi - lo) * s);
  }
  std::vector<Vec> out;
  std::vector<int> idx(d, 0);
  while (true) {
    Vec x(d);
    for (int k = 0; k < d; ++k) x(k) = axis[idx[k]];
    out.push_back(x);
    int k = d - 1;
    while (k >= 0 && ++idx[k] == n) idx[k--] = 0;
    if (k < 0) break;
  }
  return out;
}

// Each magnitude along the first axis and, for d > 1, along the diagonal.
std::vector<Vec> frequency_samples(int d, const std::vector<double>& magnitudes) {
  std::vector<Vec> out;
  for (double v : magnitudes) {
    Vec e = Vec::Zero(d);
    e(0) = v;
    out.push_back(e);
    if (d > 1) out.push_back(Vec::Constant(d, v / std::sqrt(static_cast<double>(d))));
  }
  return out;
}

std::vector<double> dyadic_range(double hmax, double hmin) {
  std::vector<double> hs;
  for (double h = hmax; h >= hmin * (1 - 1e-12); h *= 0.5) hs.push_back(h);
  return hs;
}

std::vector<std::string> coordinate_columns(const std::string& prefix, int d) {
  if (d == 1) return {prefix};
  std::vector<std::string> out;
  for (int k = 1; k <= d; ++k) out.push_back(prefix + std::to_string(k));
  return out;
}

void append(std::vector<double>& row, const Vec& v) {
  for (Eigen::Index k = 0; k < v.size(); ++k) row.push_back(v(k));
}

struct Recorder {
  SuiteReport& r;

  void fact(const std::string& key, const std::string& value) { r.facts.emplace_back(key, value); }
  void fact(const std::string& key, double value) { fact(key, brief(value)); }
  void check(const std::string& name, const std::string& measured, const std::string& target, bool pass) {
    r.rows.push_back({name, measured, target, pass});
  }
  void check(const std::string& name, double measured, const std::string& target, bool pass) {
    check(name, brief(measured), target, pass);
  }
  // A check whose computation throws is recorded as failed with the error.
  template <class F>
  void guarded(const std::string& name, F body) {
    try {
      body();
    } catch (const Error& e) {
      check(name, std::string(e.kind()) + ": " + e.what(), "completes", false);
    }
  }
};

// ---------------------------------------------------------------------------
// Suites

void phase_suite(const Config& c, Recorder& rec) {
  const auto m = make_metric(c);
  const auto q0 = make_phase_symbol(c, m);
  const int d = m->dim();
  const double sigma = c.number("sigma"), t_max = c.number("t.max");
  const int steps = c.integer("t.steps");
  const double dt = c.number("flow.dt") > 0.0 ? c.number("flow.dt") : t_max / steps / 4;
  const double xr = c.number("x.range");
  const auto xs = tensor_points(d, c.integer("box.points_per_dim"), -xr, xr, true);
  const auto xis = frequency_samples(d, c.numbers("xi.values"));
  const auto build = [&](int nt, double step) {
    PhaseOptions o;
    o.flow.dt = step;
    return build_phase(q0, uniform(-t_max, t_max, 2 * nt), xs, xis, o);
  };
  const auto tab = build(steps, dt);
  const auto horizon = caustic_horizon(tab);

  CsvTable csv{"phase", {"t"}, {}};
  for (const auto& s : coordinate_columns("x", d)) csv.columns.push_back(s);
  for (const auto& s : coordinate_columns("xi", d)) csv.columns.push_back(s);
  csv.columns.push_back("S");
  csv.columns.push_back("residual");
  double analytic = 0.0, exactness = 0.0;
  for (std::size_t it = 0; it < tab.times().size(); ++it)
    for (std::size_t ix = 0; ix < tab.xs().size(); ++ix)
      for (std::size_t ik = 0; ik < tab.xis().size(); ++ik) {
        const double t = tab.times()[it];
        const Vec& x = tab.xs()[ix];
        const Vec& xi = tab.xis()[ik];
        const auto& n = tab.node(it, ix, ik);
        const double res = std::abs(n.dS_dt - q0(x, n.grad_x));
        analytic = std::max(analytic, res);
        if (is_flat(c) && std::abs(t) <= horizon.t0)
          exactness = std::max(exactness, std::abs(n.S - x.dot(xi) - t * std::pow(xi.norm(), sigma)));
        std::vector<double> row{t};
        append(row, x);
        append(row, xi);
        row.push_back(n.S);
        row.push_back(res);
        csv.rows.push_back(std::move(row));
      }
  rec.r.tables.push_back(std::move(csv));

  rec.fact("caustic horizon t0", horizon.t0);
  rec.fact("horizon binding condition", horizon.binding);
  rec.fact("HJ residual max", analytic == 0.0 ? std::string("0 (exact)") : brief(analytic));
  const auto est = certify_phase_estimates(tab, q0);
  rec.fact("first-order phase constant", est.first_order);
  rec.fact("second-order phase constant", est.second_order);

  if (is_flat(c)) rec.check("flat phase exactness", exactness, "< 1e-10", exactness < 1e-10);
  const double fd = hj_residual(tab, q0);
  rec.check("HJ residual (fourth-order differences in t)", fd, "< 1e-5", fd < 1e-5);
  if (!is_flat(c)) {
    rec.guarded("HJ residual order under (dt, grid) refinement", [&] {
      const double fine = hj_residual(build(2 * steps, dt / 2), q0);
      rec.fact("HJ residual on the refined grid", fine);
      const double order = std::log2(fd / fine);
      rec.check("HJ residual order under (dt, grid) refinement", order, ">= 2", order >= 2.0);
    });
  }
}

void kernel_suite(const Config& c, Recorder& rec) {
  const auto m = make_metric(c);
  const auto q0 = make_phase_symbol(c, m);
  const auto cut = make_cutoff(c);
  const auto a = cutoff_symbol(m, cut, constant_envelope(1));
  const double sigma = c.number("sigma"), h = c.number("h"), t = c.number("t"), x0 = c.number("kernel.x");
  const double L = c.number("box.length");
  const auto opts = fio_options(c);
  const SampledPhase phase(q0, t, L, opts);
  const auto amp = transported_amplitude(a, q0, t, 1);

  const double speed = sigma * std::max(std::pow(opts.band.lo, sigma - 1), std::pow(opts.band.hi, sigma - 1)) *
                       std::pow(metric_range(c).hi, 0.5 * sigma);
  const double half = std::min(1.5 * t * speed + 20 * h, 0.5 * L);
  const auto K = kernel(phase, amp, h, {x0}, x0 - half, x0 + half, c.integer("kernel.y_points"));
  CsvTable csv{"kernel", {"x", "y", "re", "im", "abs"}, {}};
  for (std::size_t j = 0; j < K.ys.size(); ++j) {
    const Complex v = K.values(0, static_cast<Eigen::Index>(j));
    csv.rows.push_back({x0, K.ys[j], v.real(), v.imag(), std::abs(v)});
  }
  rec.r.tables.push_back(std::move(csv));

  const double sup = kernel_sup(phase, amp, h, x0);
  rec.fact("lambda = t / h", t / h);
  rec.fact("sup |K|", sup);
  rec.fact("h sup |K|", h * sup);
  rec.fact("h (1 + t/h)^(1/2) sup |K|", h * std::sqrt(1 + t / h) * sup);

  const double lam = c.number("nonstationary.lambda");
  if (lam > 0.0) {
    rec.guarded("non-stationary region decay", [&] {
      const double tt = lam * h;
      const SampledPhase far(q0, tt, L, opts);
      const double r = nonstationary_ratio(far, transported_amplitude(a, q0, tt, 1), *m, h, x0,
                                           default_c_large(sigma, opts.band));
      rec.check("non-stationary region decay (t = " + brief(tt) + ")", r, "< 1e-4", r < 1e-4);
    });
  }

  if (!is_flat(c)) {
    rec.fact("flat-metric checks", "skipped (stationary phase, Hessian identity and remainder use the flat oracle)");
    return;
  }

  rec.guarded("stationary-phase peak", [&] {
    const auto ap = c.numbers("amplitude.plateau");
    const auto peaked = cutoff_symbol(m, make_bump(c.number("cutoff.r1"), c.number("cutoff.r2"), {ap[0], ap[1]}),
                                      constant_envelope(1));
    const double s = kernel_sup(phase, transported_amplitude(peaked, q0, t, 1), h, x0);
    const double predicted = stationary_phase_peak(q0, peaked, h, t, opts.band);
    const double dev = std::abs(s / predicted - 1.0);
    rec.fact("stationary-phase prediction", predicted);
    rec.check("stationary-phase peak (relative deviation)", dev, "< 0.15", dev < 0.15);
  });

  rec.guarded("Hessian determinant identity", [&] {
    const auto pl = c.numbers("cutoff.plateau");
    const double eta = 1.1 * std::pow(pl[0] * pl[1], 0.25);
    const Vec x = vec1(x0), y = vec1(x0 + t * sigma * std::pow(eta, sigma - 1));
    const auto s = stationary_hessian(q0, *m, sigma, t, x, y, vec1(eta * 0.9));
    const double err = std::abs(std::abs(s.det) - s.expected);
    rec.check("Hessian determinant identity at eta = " + brief(eta), err, "< 1e-6", err < 1e-6);
  });

  const int order = c.integer("remainder.order");
  if (order > 0) {
    rec.guarded("parametrix remainder slope", [&] {
      const double kappa = c.number("remainder.kappa");
      const auto ar = cutoff_symbol(m, cut, kappa > 0.0 ? periodic_envelope(L, kappa) : constant_envelope(1));
      const auto packet = [](const PeriodicGrid& g, double hh) {
        return gaussian_packet(g, vec1(0.3), 0.5, vec1(1.2 / hh));
      };
      const auto fit = remainder_decay(q0, ar, sigma, c.number("remainder.t"), c.numbers("remainder.h"), order, L,
                                       packet, opts);
      CsvTable rt{"kernel_remainder", {"h", "points", "ratio"}, {}};
      for (const auto& s : fit.samples) rt.rows.push_back({s.h, static_cast<double>(s.points), s.ratio});
      rec.r.tables.push_back(std::move(rt));
      const double need = order == 2 ? 1.0 : 0.0;
      rec.check("parametrix remainder slope (order " + std::to_string(order) + ")", fit.fit.slope,
                ">= " + brief(need), fit.fit.slope >= need);
    });
  }
}

void dispersive_suite(const Config& c, Recorder& rec) {
  const auto m = make_metric(c);
  const auto q0 = make_phase_symbol(c, m);
  const auto a = cutoff_symbol(m, make_cutoff(c), constant_envelope(1));
  const double h = c.number("h"), t0 = c.number("t0");
  const int n = c.integer("t.samples");
  std::vector<double> ts;
  for (int i = 0; i < n; ++i) ts.push_back(2 * h * std::pow(t0 / (2 * h), static_cast<double>(i) / (n - 1)));
  const auto fit = dispersive_fit(q0, a, h, ts, t0, c.number("box.length"), fio_options(c));
  CsvTable csv{"dispersive", {"h", "t", "lambda", "sup_kernel"}, {}};
  for (const auto& s : fit.samples) csv.rows.push_back({h, s.t, s.lambda, s.sup_kernel});
  rec.r.tables.push_back(std::move(csv));
  rec.fact("slope", fit.fit.slope);
  rec.fact("intercept", fit.fit.intercept);
  rec.fact("R^2", fit.fit.r2);
  const double target = -0.5 * c.integer("d");
  rec.check("dispersive decay exponent", fit.fit.slope, brief(target) + " +- 0.1",
            std::abs(fit.fit.slope - target) <= 0.1);
}

void strichartz_suite(const Config& c, Recorder& rec) {
  const double sigma = c.number("sigma");
  const int d = c.integer("d");
  const auto pair = classify_pair(c.number("p"), c.number("q"), d, sigma);
  rec.fact("admissible", pair.valid ? "yes" : "no");
  rec.fact("gamma", pair.gamma);
  rec.fact("loss", pair.loss);
  rec.fact("total exponent", pair.total);
  const auto cut = make_cutoff(c);
  const auto hs = dyadic_range(c.number("hmax"), c.number("hmin"));
  ScalingOptions o;
  o.box_length = c.number("box.length");
  o.max_steps = c.integer("time.max_steps");
  const auto& mode = c.text("mode");
  const auto record = [&](const std::string& name, const ScalingStudy& s, bool tiles) {
    CsvTable t{name, {"h", "points", "time_samples", "norm_ratio"}, {}};
    if (tiles) t.columns.push_back("tiles");
    const auto I = c.numbers("interval");
    for (const auto& smp : s.samples) {
      std::vector<double> row{smp.h, static_cast<double>(smp.points), static_cast<double>(smp.times), smp.ratio};
      if (tiles) row.push_back(static_cast<double>(tile_interval({I[0], I[1]}, smp.h, sigma)));
      t.rows.push_back(std::move(row));
    }
    rec.r.tables.push_back(std::move(t));
  };
  if (mode != "unscaled") {
    rec.guarded("semiclassical scaling slope", [&] {
      const auto s = measure_semiclassical_scaling(sigma, pair, cut, hs, c.number("t0"), o);
      record("strichartz_semiclassical", s, false);
      rec.fact("semiclassical fit R^2", s.fit.r2);
      rec.check("semiclassical scaling slope", s.fit.slope, ">= " + brief(s.bound - s.margin), s.passes());
    });
  }
  if (mode != "semiclassical") {
    rec.guarded("unscaled scaling slope", [&] {
      const auto I = c.numbers("interval");
      const auto s = measure_unscaled_scaling(sigma, pair, cut, hs, {I[0], I[1]}, o);
      record("strichartz_unscaled", s, sigma > 1.0);
      rec.fact("unscaled fit R^2", s.fit.r2);
      rec.check("unscaled scaling slope (gamma + loss)", s.fit.slope, ">= " + brief(s.bound - s.margin),
                s.passes());
    });
  }
  const int states = c.integer("identity.states");
  if (states > 0) {
    rec.guarded("time-rescaling identity", [&] {
      const double h = hs.front();
      const PeriodicGrid grid(d, scaling_points(cut, h, o.box_length, o.max_points), o.box_length);
      const auto op = SpectralOperator::flat(grid);
      const auto times = graded_times(1e-3, c.number("t0"), 1.05, 200);
      std::mt19937_64 rng(static_cast<std::uint64_t>(c.integer("seed")));
      double worst = 0.0;
      for (int k = 0; k < states; ++k) {
        const auto v = frequency_localize(random_band_limited(grid, std::sqrt(cut.support().hi) / h, rng), op, cut, h);
        worst = std::max(worst, scaling_identity(v, op, sigma, h, pair.p, pair.q, times).relative_gap());
      }
      rec.check("time-rescaling identity (" + std::to_string(states) + " states)", worst, "< 1e-10", worst < 1e-10);
    });
  }
}

std::shared_ptr<const SpectralOperator> nonlinear_operator(const Config& c) {
  const int n = c.integer("box.points_per_dim");
  if (is_flat(c))
    return std::make_shared<const SpectralOperator>(
        SpectralOperator::flat(PeriodicGrid(c.integer("d"), n, c.number("box.length"))));
  return std::make_shared<const SpectralOperator>(discretize_P_1d(*make_metric(c), n));
}

StateField initial_field(const Config& c, const PeriodicGrid& grid, bool velocity) {
  const double scale = c.number(velocity ? "data.velocity" : "data.amplitude");
  const auto& kind = c.text("data.kind");
  const double k = 2 * kPi / grid.box_length();
  if (kind == "random") {
    std::mt19937_64 rng(static_cast<std::uint64_t>(c.integer("seed")) + (velocity ? 1u : 0u));
    StateField u = random_band_limited(grid, c.number("data.kmax"), rng);
    const double sup = u.sup_norm();
    return sup > 0.0 ? Complex(scale / sup) * u : u;
  }
  CVector v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.point(i)(0);
    if (kind == "constant")
      v(i) = scale;
    else if (velocity)
      v(i) = scale * std::sin(k * x);
    else
      v(i) = scale * Complex(0.6 + 0.3 * std::cos(k * x), 0.2 * std::sin(2 * k * x));
  }
  return StateField(grid, v);
}

NlfsProblem nonlinear_problem(const Config& c, bool wave) {
  auto op = nonlinear_operator(c);
  NlfsProblem p(op, initial_field(c, op->grid(), false));
  p.sigma = c.number("sigma");
  p.nu = c.number("nu");
  p.mu = c.number("mu");
  p.T = c.number("T");
  p.dt = c.number("dt");
  p.record_every = c.integer("record_every");
  if (wave) p.v1 = initial_field(c, op->grid(), true);
  validate(p);
  return p;
}

CsvTable monitor_table(const std::string& name, const NlfsTrajectory& tr) {
  CsvTable t{name, {"t", "mass", "energy", "linf", "sobolev"}, {}};
  for (const auto& m : tr.monitors) t.rows.push_back({m.t, m.mass, m.energy, m.sup, m.sobolev});
  return t;
}

CsvTable state_table(const std::string& name, const StateField& u) {
  const int d = u.grid().dim();
  CsvTable t{name, coordinate_columns("x", d), {}};
  t.columns.push_back("re");
  t.columns.push_back("im");
  for (std::size_t i = 0; i < u.grid().size(); ++i) {
    std::vector<double> row;
    append(row, u.grid().point(i));
    row.push_back(u.values()(static_cast<Eigen::Index>(i)).real());
    row.push_back(u.values()(static_cast<Eigen::Index>(i)).imag());
    t.rows.push_back(std::move(row));
  }
  return t;
}

void energy_order_check(Recorder& rec, const NlfsProblem& p, const NlfsTrajectory& coarse,
                        NlfsTrajectory (*solve)(const NlfsProblem&)) {
  if (p.mu == 0.0) {
    const double drift = coarse.max_energy_drift();
    rec.check("energy drift (linear flow)", drift, "< 1e-10", drift < 1e-10);
    return;
  }
  rec.guarded("energy drift ratio under dt halving", [&] {
    NlfsProblem half = p;
    half.dt = 0.5 * p.dt;
    half.record_every = 2 * p.record_every;
    const double fine = solve(half).max_energy_drift();
    const double ratio = coarse.max_energy_drift() / fine;
    rec.fact("energy drift at dt / 2", fine);
    rec.check("energy drift ratio under dt halving", ratio, ">= 3.5", ratio >= 3.5);
  });
}

void nlfs_suite(const Config& c, Recorder& rec) {
  const auto p = nonlinear_problem(c, false);
  const auto tr = solve_nlfs(p);
  rec.r.tables.push_back(monitor_table("nlfs_monitors", tr));
  rec.r.tables.push_back(state_table("nlfs_final_state", tr.states.back()));
  for (const auto& w : tr.warnings) rec.fact("warning", w);
  rec.fact("initial mass", tr.monitors.front().mass);
  rec.fact("initial energy", tr.monitors.front().energy);
  rec.fact("energy drift", tr.max_energy_drift());
  const double mass = tr.max_mass_drift();
  rec.check("mass drift", mass, "< 1e-10", mass < 1e-10);
  energy_order_check(rec, p, tr, solve_nlfs);

  const double Tp = c.number("picard.T");
  if (Tp > 0.0) {
    rec.guarded("Picard contraction", [&] {
      NlfsProblem q = p;
      q.T = Tp;
      q.record_every = 1;
      const auto a = picard_iterate(q);
      NlfsProblem half = q;
      half.T = 0.5 * Tp;
      const auto b = picard_iterate(half);
      CsvTable t{"nlfs_picard", {"iteration", "difference", "ratio"}, {}};
      for (std::size_t k = 0; k < a.report.differences.size(); ++k)
        t.rows.push_back({static_cast<double>(k), a.report.differences[k],
                          k == 0 ? std::numeric_limits<double>::quiet_NaN() : a.report.ratios[k - 1]});
      rec.r.tables.push_back(std::move(t));
      double worst = 0.0;
      for (double r : a.report.ratios) worst = std::max(worst, r);
      rec.fact("Picard iterations", std::to_string(a.report.iterations));
      rec.check("Picard contraction (largest ratio)", worst, "< 1", a.report.converged && worst < 1.0);
      const double q2 = a.report.ratios.front() / b.report.ratios.front();
      rec.check("Picard ratio(T) / ratio(T/2)", q2, "in [1.5, 2.5]", q2 >= 1.5 && q2 <= 2.5);
      const auto split = solve_nlfs(q);
      double gap = 0.0;
      for (std::size_t k = 0; k < split.states.size(); ++k)
        gap = std::max(gap, p.op->l2_norm(a.trajectory.states[k] - split.states[k]));
      rec.check("Picard limit against split-step (L2)", gap, "< 1e-6", gap < 1e-6);
    });
  }

  const double Tc = c.number("continuation.T");
  if (Tc > 0.0 && p.mu != 1.0) {
    rec.fact("continuation", "skipped (needs mu = 1)");
  } else if (Tc > 0.0) {
    rec.guarded("global continuation", [&] {
      NlfsProblem q = p;
      q.record_every = std::max(1, p.record_every);
      const auto res = global_continuation(q, Tc);
      CsvTable t{"nlfs_continuation", {"t_start", "length", "sobolev_start", "ratio"}, {}};
      for (const auto& s : res.steps) t.rows.push_back({s.t_start, s.length, s.sobolev_start, s.ratio});
      rec.r.tables.push_back(std::move(t));
      rec.r.tables.push_back(monitor_table("nlfs_continuation_monitors", res.trajectory));
      double peak = 0.0;
      for (const auto& m : res.trajectory.monitors) peak = std::max(peak, m.sobolev);
      rec.fact("continuation windows", std::to_string(res.steps.size()));
      rec.fact("conservation bound", res.bound);
      const bool reached = std::abs(res.trajectory.times.back() - Tc) <= 1e-9 * std::max(1.0, Tc);
      rec.check("continuation H^(sigma/2) norm under the conservation bound", peak, "<= " + brief(res.bound),
                reached && res.within_bound());
    });
  }
}

void nlfw_suite(const Config& c, Recorder& rec) {
  const auto p = nonlinear_problem(c, true);
  const auto tr = solve_nlfw(p);
  rec.r.tables.push_back(monitor_table("nlfw_monitors", tr));
  rec.r.tables.push_back(state_table("nlfw_final_state", tr.states.back()));
  for (const auto& w : tr.warnings) rec.fact("warning", w);
  rec.fact("initial energy", tr.monitors.front().energy);
  rec.fact("energy drift", tr.max_energy_drift());
  energy_order_check(rec, p, tr, solve_nlfw);

  rec.guarded("kernel mode moves linearly", [&] {
    const auto& g = p.op->grid();
    NlfsProblem q(p.op, StateField(g, CVector::Constant(static_cast<Eigen::Index>(g.size()), 0.4)));
    q.v1 = StateField(g, CVector::Constant(static_cast<Eigen::Index>(g.size()), -1.3));
    q.sigma = p.sigma;
    q.mu = 0.0;
    q.T = p.T;
    q.dt = p.dt;
    q.record_every = p.record_every;
    const auto lin = solve_nlfw(q);
    double worst = 0.0;
    for (std::size_t k = 0; k < lin.times.size(); ++k)
      worst = std::max(worst, (lin.states[k].values().array() - (0.4 - 1.3 * lin.times[k])).abs().maxCoeff());
    rec.check("kernel mode: v(t) = v0 + t v1 for constant data", worst, "< 1e-12", worst < 1e-12);
  });
}

void audit_suite(const Config& c, Recorder& rec) {
  const auto m = make_metric(c);
  const int d = m->dim();
  const int n = c.integer("box.points_per_dim");
  const auto audit = audit_assumptions(*m, box_samples(*m, n));
  rec.fact("ellipticity constant", audit.ellipticity);
  rec.fact("smallest eigenvalue of G", audit.min_eigenvalue);
  rec.fact("largest eigenvalue of G", audit.max_eigenvalue);
  for (std::size_t k = 0; k < audit.derivative_bounds.size(); ++k)
    rec.fact("derivative bound, order " + std::to_string(k + 1), audit.derivative_bounds[k]);
  rec.check("ellipticity", audit.min_eigenvalue, "> 0", audit.min_eigenvalue > 0.0);

  const auto q0 = make_phase_symbol(c, m);
  const auto H = characteristic_hamiltonian(q0);
  const double t_max = c.number("t.max"), xr = c.number("x.range");
  const int steps = c.integer("t.steps");
  const auto xis = frequency_samples(d, c.numbers("xi.values"));
  rec.guarded("flow bound constants", [&] {
    const auto coarse = build_flow_table(H, uniform(-t_max, t_max, 2 * steps), tensor_points(d, n, -xr, xr, false), xis);
    const auto fine_tab =
        build_flow_table(H, uniform(-t_max, t_max, 4 * steps), tensor_points(d, 2 * n, -xr, xr, false), xis);
    const auto a = fit_flow_bounds(coarse), b = fit_flow_bounds(fine_tab);
    rec.fact("Jacobian constant (coarse, fine)", brief(a.jacobian_constant) + ", " + brief(b.jacobian_constant));
    rec.fact("inverse-map constant (coarse, fine)", brief(a.inverse_constant) + ", " + brief(b.inverse_constant));
    rec.fact("flow horizon", b.horizon);
    const auto change = [](double x, double y) { return x == y ? 0.0 : std::abs(y / x - 1.0); };
    const double dz = change(a.jacobian_constant, b.jacobian_constant);
    const double dy = change(a.inverse_constant, b.inverse_constant);
    rec.check("Jacobian constant stable across resolutions", dz, "<= 0.1",
              std::isfinite(b.jacobian_constant) && dz <= 0.1);
    rec.check("inverse-map constant stable across resolutions", dy, "<= 0.1",
              std::isfinite(b.inverse_constant) && dy <= 0.1);
    rec.check("flow energy drift", b.max_energy_error, "< 1e-8", b.max_energy_error < 1e-8);

    CsvTable t{"audit_flow", {"t"}, {}};
    for (const auto& s : coordinate_columns("x", d)) t.columns.push_back(s);
    for (const auto& s : coordinate_columns("xi", d)) t.columns.push_back(s);
    for (const auto& s : coordinate_columns("X", d)) t.columns.push_back(s);
    for (const auto& s : coordinate_columns("Xi", d)) t.columns.push_back(s);
    t.columns.push_back("H_error");
    for (std::size_t it = 0; it < fine_tab.times().size(); ++it)
      for (std::size_t ix = 0; ix < fine_tab.xs().size(); ++ix)
        for (std::size_t ik = 0; ik < fine_tab.xis().size(); ++ik) {
          const auto& node = fine_tab.node(it, ix, ik);
          std::vector<double> row{fine_tab.times()[it]};
          append(row, fine_tab.xs()[ix]);
          append(row, fine_tab.xis()[ik]);
          append(row, node.X);
          append(row, node.Xi);
          row.push_back(node.energy_error);
          t.rows.push_back(std::move(row));
        }
    rec.r.tables.push_back(std::move(t));
  });

  rec.guarded("phase estimate constants", [&] {
    const auto est = [&](int nt, int nx) {
      return certify_phase_estimates(
          build_phase(q0, uniform(-t_max, t_max, 2 * nt), tensor_points(d, nx, -xr, xr, false), xis), q0);
    };
    const auto a = est(steps, n / 2), b = est(2 * steps, n);
    rec.fact("first-order phase constant (coarse, fine)", brief(a.first_order) + ", " + brief(b.first_order));
    rec.fact("second-order phase constant (coarse, fine)", brief(a.second_order) + ", " + brief(b.second_order));
    if (is_flat(c)) {
      rec.check("second-order phase constant vanishes (flat)", b.second_order, "< 1e-8", b.second_order < 1e-8);
    } else {
      const double ch = std::abs(b.second_order / a.second_order - 1.0);
      rec.check("second-order phase constant stable across resolutions", ch, "<= 0.2", ch <= 0.2);
    }
  });

  rec.guarded("Littlewood-Paley partition", [&] {
    const LittlewoodPaley lp(c.integer("lp.k_max"));
    std::vector<double> lambdas;
    for (int i = 0; i <= 4000; ++i) lambdas.push_back(lp.exact_range() * 16.0 * i / 4000);
    const auto chk = lp.check(lambdas);
    rec.check("partition of unity on the untruncated range", chk.max_error, "< 1e-12", chk.max_error < 1e-12);
    rec.fact("grid points past the truncation range", std::to_string(chk.truncated_points));

    const int nr = d == 1 ? 512 : d == 2 ? 128 : 32;
    const PeriodicGrid g(d, nr, 2 * kPi);
    const auto op = SpectralOperator::flat(g);
    std::mt19937_64 rng(static_cast<std::uint64_t>(c.integer("seed")));
    const double k_cap = 0.9 * std::min(std::sqrt(lp.exact_range()), g.nyquist());
    const auto u = random_band_limited(g, k_cap, rng);
    const double err = (littlewood_paley_reconstruct(u, op, lp) - u).l2_norm() / u.l2_norm();
    rec.check("Littlewood-Paley reconstruction", err, "< 1e-10", err < 1e-10);
  });

  rec.guarded("Bernstein slope", [&] {
    const auto cut = make_cutoff(c);
    const int nb = d == 1 ? 2048 : d == 2 ? 256 : 32;
    const PeriodicGrid g(d, nb, 2 * kPi);
    const auto op = SpectralOperator::flat(g);
    // Smallest h whose band still fits under the Nyquist frequency.
    const double h_floor = std::sqrt(cut.support().hi) / g.nyquist();
    std::vector<double> hs, norms;
    for (double h = 0.5; h >= h_floor && hs.size() < 5; h *= 0.5) {
      hs.push_back(h);
      norms.push_back(bernstein_norm(op, cut, h));
    }
    if (hs.size() > 2) {
      hs.erase(hs.begin());
      norms.erase(norms.begin());
    }
    const double slope = fit_loglog(hs, norms).slope;
    const double target = -0.5 * d;
    rec.check("Bernstein L2 -> Linf slope", slope, brief(target) + " +- 0.1", std::abs(slope - target) <= 0.1);
  });

  bool exact = true;
  for (double sigma : {0.5, 1.5, 2.0, 3.0})
    for (int dd = 1; dd <= 3; ++dd)
      for (double p : {2.0, 4.0, 8.0, kInf})
        for (double q : {2.0, 4.0, 6.0}) exact = exact && classify_pair(p, q, dd, sigma).gamma == 0.5 * dd - dd / q - sigma / p;
  exact = exact && !classify_pair(2, kInf, 2, 2.0).valid;
  for (double sigma : {1.5, 2.0, 3.0, 7.25}) exact = exact && classify_pair(2, 6, 3, sigma).total == 0.5;
  rec.check("admissibility arithmetic", exact ? "exact" : "mismatch", "exact", exact);
}

}  // namespace

// ---------------------------------------------------------------------------

Config Config::parse(const std::string& text, const std::string& source) {
  Config c;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(number);
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (c.has(key)) throw ConfigError(where + ": repeated key '" + key + "'");
    c.values_[key] = trim(line.substr(eq + 1));
  }
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

void Config::set(const std::string& key, const std::string& value) { values_[trim(key)] = trim(value); }

void Config::merge(const Config& other) {
  for (const auto& [k, v] : other.values_) values_[k] = v;
}

const std::string& Config::text(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing key " + key);
  return it->second;
}

double Config::number(const std::string& key) const { return parse_number(key, text(key)); }

int Config::integer(const std::string& key) const {
  const double v = number(key);
  if (v != std::floor(v) || std::abs(v) > std::numeric_limits<int>::max())
    throw ConfigError(key + ": '" + text(key) + "' is not an integer");
  return static_cast<int>(v);
}

std::vector<double> Config::numbers(const std::string& key) const {
  std::vector<double> out;
  std::stringstream ss(text(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_number(key, item));
  }
  return out;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"phase", "kernel", "dispersive", "strichartz", "nlfs", "nlfw", "audit"};
  return names;
}

const std::vector<ConfigKey>& suite_keys(const std::string& suite) {
  const auto& tables = key_tables();
  const auto it = tables.find(suite);
  if (it == tables.end()) throw ConfigError("unknown suite '" + suite + "'");
  return it->second;
}

Config resolve_config(const std::string& suite, const Config& overrides) {
  const auto& keys = suite_keys(suite);
  Config c;
  for (const auto& k : keys) c.set(k.name, k.default_value);
  for (const auto& [key, value] : overrides.entries()) {
    const bool known = std::any_of(keys.begin(), keys.end(), [&](const ConfigKey& k) { return k.name == key; });
    if (!known) throw ConfigError("unknown key '" + key + "' for suite " + suite);
    c.set(key, value);
  }
  validate_suite(suite, c);
  return c;
}

bool SuiteReport::passed() const {
  return std::all_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.pass; });
}

std::string SuiteReport::text() const {
  std::ostringstream out;
  out << "suite = " << suite << "\n\n[config]\n";
  for (const auto& [k, v] : config.entries()) out << k << " = " << v << "\n";
  out << "\n[results]\n";
  for (const auto& [k, v] : facts) out << k << " = " << v << "\n";
  out << "\n[checks]\n";
  for (const auto& r : rows)
    out << (r.pass ? "PASS" : "FAIL") << "  " << r.check << ": " << r.measured << " (target " << r.target << ")\n";
  out << "\noverall = " << (passed() ? "PASS" : "FAIL") << "\n";
  return out.str();
}

SuiteReport run_suite(const std::string& suite, const Config& resolved) {
  SuiteReport r;
  r.suite = suite;
  r.config = resolved;
  Recorder rec{r};
  if (suite == "phase")
    phase_suite(resolved, rec);
  else if (suite == "kernel")
    kernel_suite(resolved, rec);
  else if (suite == "dispersive")
    dispersive_suite(resolved, rec);
  else if (suite == "strichartz")
    strichartz_suite(resolved, rec);
  else if (suite == "nlfs")
    nlfs_suite(resolved, rec);
  else if (suite == "nlfw")
    nlfw_suite(resolved, rec);
  else if (suite == "audit")
    audit_suite(resolved, rec);
  else
    throw ConfigError("unknown suite '" + suite + "'");
  return r;
}

std::string to_csv(const CsvTable& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) out += (i ? "," : "") + table.columns[i];
  out += "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + num(row[i]);
    out += "\n";
  }
  return out;
}

std::vector<std::string> write_outputs(const SuiteReport& report, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir + ": " + ec.message());
  std::vector<std::string> written;
  const auto write = [&](const std::string& name, const std::string& body) {
    const std::string path = (fs::path(dir) / name).string();
    std::ofstream out(path);
    out << body;
    if (!out) throw ConfigError("cannot write " + path);
    written.push_back(path);
  };
  for (const auto& t : report.tables) write(t.name + ".csv", to_csv(t));
  write(report.suite + "_report.txt", report.text());
  return written;
}

}  // namespace fracwkb
