#include <memory>
#include <optional>
#include <string>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fracwkb/error.hpp"
#include "fracwkb/fio.hpp"
#include "fracwkb/nlfs.hpp"
#include "fracwkb/strichartz.hpp"
#include "fracwkb/suite.hpp"

namespace py = pybind11;
using namespace fracwkb;

namespace {

Config to_config(const py::dict& values) {
  Config c;
  for (const auto& item : values) {
    const auto key = py::str(item.first).cast<std::string>();
    py::object v = py::reinterpret_borrow<py::object>(item.second);
    std::string text;
    if (py::isinstance<py::str>(v)) {
      text = v.cast<std::string>();
    } else if (py::isinstance<py::list>(v) || py::isinstance<py::tuple>(v)) {
      for (const auto& e : v) text += (text.empty() ? "" : ",") + py::repr(e).cast<std::string>();
    } else {
      text = py::repr(v).cast<std::string>();
    }
    c.set(key, text);
  }
  return c;
}

py::dict config_dict(const Config& c) {
  py::dict d;
  for (const auto& [k, v] : c.entries()) d[py::str(k)] = v;
  return d;
}

py::dict report_dict(const SuiteReport& r) {
  py::dict out;
  out["suite"] = r.suite;
  out["passed"] = r.passed();
  out["config"] = config_dict(r.config);
  py::list facts;
  for (const auto& [k, v] : r.facts) facts.append(py::make_tuple(k, v));
  out["facts"] = facts;
  py::list checks;
  for (const auto& row : r.rows) {
    py::dict d;
    d["check"] = row.check;
    d["measured"] = row.measured;
    d["target"] = row.target;
    d["pass"] = row.pass;
    checks.append(d);
  }
  out["checks"] = checks;
  py::dict tables;
  for (const auto& t : r.tables) {
    const std::size_t cols = t.columns.size();
    py::array_t<double> data({t.rows.size(), cols});
    auto view = data.mutable_unchecked<2>();
    for (std::size_t i = 0; i < t.rows.size(); ++i)
      for (std::size_t j = 0; j < cols; ++j) view(i, j) = t.rows[i][j];
    py::dict td;
    td["columns"] = t.columns;
    td["data"] = data;
    tables[py::str(t.name)] = td;
  }
  out["tables"] = tables;
  out["text"] = r.text();
  return out;
}

std::shared_ptr<const MetricField> metric_1d(double epsilon, double box_length) {
  if (epsilon == 0.0) return std::make_shared<const MetricField>(MetricField::flat(1, box_length));
  return std::make_shared<const MetricField>(MetricField::gaussian_bump(1, box_length, epsilon));
}

RealSymbol default_q0(double sigma, double epsilon, double box_length) {
  const auto cut = make_bump(0.25, 4.0, {0.5, 2.0}).widened(epsilon == 0.0 ? 1.0 : 2.0);
  return make_q0(metric_1d(epsilon, box_length), semiclassical_psi(cut, sigma));
}

StateField field_1d(const Eigen::VectorXcd& values, double box_length) {
  const PeriodicGrid g(1, static_cast<int>(values.size()), box_length);
  return StateField(g, values);
}

}  // namespace

PYBIND11_MODULE(_fracwkb, m) {
  m.doc() = "Semiclassical toolkit for fractional Schrodinger groups";

  static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
  static py::exception<ConfigError> config_error(m, "ConfigError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      py::set_error(config_error, e.what());
    } catch (const Error& e) {
      py::set_error(base, (std::string(e.kind()) + ": " + e.what()).c_str());
    }
  });

  m.def("suite_names", &suite_names);
  m.def(
      "suite_keys",
      [](const std::string& suite) {
        py::list out;
        for (const auto& k : suite_keys(suite)) out.append(py::make_tuple(k.name, k.default_value, k.help));
        return out;
      },
      py::arg("suite"), "(name, default, help) for every key the suite accepts");
  m.def(
      "resolve_config",
      [](const std::string& suite, const py::dict& overrides) {
        return config_dict(resolve_config(suite, to_config(overrides)));
      },
      py::arg("suite"), py::arg("overrides") = py::dict());
  m.def(
      "run_suite",
      [](const std::string& suite, const py::dict& overrides, std::optional<std::string> output_dir) {
        const auto cfg = resolve_config(suite, to_config(overrides));
        SuiteReport r;
        {
          py::gil_scoped_release release;
          r = run_suite(suite, cfg);
          if (output_dir) write_outputs(r, *output_dir);
        }
        return report_dict(r);
      },
      py::arg("suite"), py::arg("overrides") = py::dict(), py::arg("output_dir") = py::none(),
      "Run a suite; optionally write its CSV and report files.");

  m.def(
      "classify_pair",
      [](double p, double q, int d, double sigma) {
        const auto a = classify_pair(p, q, d, sigma);
        py::dict out;
        out["valid"] = a.valid;
        out["gamma"] = a.gamma;
        out["loss"] = a.loss;
        out["total"] = a.total;
        return out;
      },
      py::arg("p"), py::arg("q"), py::arg("d"), py::arg("sigma"));
  m.def(
      "tile_interval", [](double lo, double hi, double h, double sigma) { return tile_interval({lo, hi}, h, sigma); },
      py::arg("lo"), py::arg("hi"), py::arg("h"), py::arg("sigma"));
  m.def(
      "cutoff",
      [](double r1, double r2, double lo, double hi, const Eigen::VectorXd& lambdas) {
        const auto c = make_bump(r1, r2, {lo, hi});
        Eigen::VectorXd out(lambdas.size());
        for (Eigen::Index i = 0; i < lambdas.size(); ++i) out(i) = c(lambdas(i));
        return out;
      },
      py::arg("r1"), py::arg("r2"), py::arg("plateau_lo"), py::arg("plateau_hi"), py::arg("lambdas"));
  m.def(
      "principal_symbol",
      [](double epsilon, double x, double xi) {
        return principal_symbol(*metric_1d(epsilon, 20.0), vec1(x), vec1(xi));
      },
      py::arg("epsilon"), py::arg("x"), py::arg("xi"), "p(x, xi) for g = 1 + epsilon exp(-x^2), d = 1");
  m.def(
      "flow",
      [](double sigma, double epsilon, double t, double x, double xi) {
        const auto H = characteristic_hamiltonian(default_q0(sigma, epsilon, 20.0));
        const auto f = integrate_flow(H, t, vec1(x), vec1(xi));
        return py::make_tuple(f.X(0), f.Xi(0));
      },
      py::arg("sigma"), py::arg("epsilon"), py::arg("t"), py::arg("x"), py::arg("xi"),
      "Characteristic (X, Xi) at time t, d = 1");
  m.def(
      "phase",
      [](double sigma, double epsilon, double t, double x, double xi) {
        const auto n = phase_at(default_q0(sigma, epsilon, 20.0), t, vec1(x), vec1(xi));
        py::dict out;
        out["S"] = n.S;
        out["dS_dt"] = n.dS_dt;
        out["Y"] = n.Y(0);
        out["grad_x"] = n.grad_x(0);
        out["hess_xixi"] = n.hess_xixi(0, 0);
        return out;
      },
      py::arg("sigma"), py::arg("epsilon"), py::arg("t"), py::arg("x"), py::arg("xi"));
  m.def(
      "propagate",
      [](const Eigen::VectorXcd& values, double box_length, double sigma, double t, std::optional<double> h) {
        const auto u = field_1d(values, box_length);
        return Eigen::VectorXcd(propagate(u, SpectralOperator::flat(u.grid()), sigma, t, h).values());
      },
      py::arg("values"), py::arg("box_length"), py::arg("sigma"), py::arg("t"), py::arg("h") = py::none(),
      "exp(i t Lambda^sigma) on the flat periodic line");
  m.def(
      "dispersive_fit",
      [](double sigma, double h, double t0, int samples, double box_length) {
        const auto q0 = default_q0(sigma, 0.0, box_length);
        const auto a = cutoff_symbol(metric_1d(0.0, box_length), make_bump(0.25, 4.0, {0.5, 2.0}),
                                     constant_envelope(1));
        std::vector<double> ts;
        for (int i = 0; i < samples; ++i)
          ts.push_back(2 * h * std::pow(t0 / (2 * h), static_cast<double>(i) / (samples - 1)));
        DispersiveFit fit;
        {
          py::gil_scoped_release release;
          fit = dispersive_fit(q0, a, h, ts, t0, box_length);
        }
        py::dict out;
        std::vector<double> t, sup;
        for (const auto& s : fit.samples) {
          t.push_back(s.t);
          sup.push_back(s.sup_kernel);
        }
        out["t"] = t;
        out["sup_kernel"] = sup;
        out["slope"] = fit.fit.slope;
        out["r2"] = fit.fit.r2;
        return out;
      },
      py::arg("sigma"), py::arg("h"), py::arg("t0"), py::arg("samples") = 10, py::arg("box_length") = 4 * kPi);
  m.def(
      "solve_nlfs",
      [](const Eigen::VectorXcd& values, double box_length, double sigma, double nu, double mu, double T, double dt,
         int record_every) {
        const auto u0 = field_1d(values, box_length);
        NlfsProblem p(std::make_shared<const SpectralOperator>(SpectralOperator::flat(u0.grid())), u0);
        p.sigma = sigma;
        p.nu = nu;
        p.mu = mu;
        p.T = T;
        p.dt = dt;
        p.record_every = record_every;
        NlfsTrajectory tr;
        {
          py::gil_scoped_release release;
          tr = solve_nlfs(p);
        }
        Eigen::MatrixXd mon(tr.monitors.size(), 5);
        for (std::size_t i = 0; i < tr.monitors.size(); ++i) {
          const auto& mo = tr.monitors[i];
          mon.row(static_cast<Eigen::Index>(i)) << mo.t, mo.mass, mo.energy, mo.sup, mo.sobolev;
        }
        py::dict out;
        out["monitors"] = mon;
        out["columns"] = std::vector<std::string>{"t", "mass", "energy", "linf", "sobolev"};
        out["final"] = Eigen::VectorXcd(tr.states.back().values());
        out["warnings"] = tr.warnings;
        return out;
      },
      py::arg("values"), py::arg("box_length"), py::arg("sigma") = 2.0, py::arg("nu") = 3.0, py::arg("mu") = 1.0,
      py::arg("T") = 1.0, py::arg("dt") = 1e-3, py::arg("record_every") = 10,
      "Split-step solve of the nonlinear fractional Schrodinger equation on the flat periodic line");
}
