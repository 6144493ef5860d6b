#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cli.hpp"
#include "oseen_rotor/convolution_tables.hpp"
#include "oseen_rotor/expansion.hpp"
#include "oseen_rotor/scalar_kernels.hpp"
#include "oseen_rotor/time_quadrature.hpp"
#include "oseen_rotor/wake_geometry.hpp"

namespace py = pybind11;
using namespace oseen_rotor;

namespace {

MultiIndex index_of(const std::array<int, 3>& a) { return MultiIndex(a[0], a[1], a[2]); }

QuadSpec spec_of(double rel_tol, double abs_tol) {
  QuadSpec s;
  s.rel_tol = rel_tol;
  s.abs_tol = abs_tol;
  s.validate();
  return s;
}

py::tuple z_pair(const ZValue& v) { return py::make_tuple(v.value, v.error_estimate); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Rotating Oseen kernel: kernels, time integrals, convolution exponents";
  m.attr("__version__") = OSEEN_ROTOR_VERSION;

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<SingularPointError>(m, "SingularPointError", base.ptr());
  py::register_exception<UnsupportedOrderError>(m, "UnsupportedOrderError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());
  py::register_exception<DivergentIntegralError>(m, "DivergentIntegralError", base.ptr());
  py::register_exception<AccuracyError>(m, "AccuracyError", base.ptr());

  py::class_<FlowParams>(m, "FlowParams")
      .def(py::init<double, double>(), py::arg("tau") = 1.0, py::arg("rho") = 1.0)
      .def_property_readonly("tau", &FlowParams::tau)
      .def_property_readonly("rho", &FlowParams::rho)
      .def("__repr__", [](const FlowParams& p) {
        std::ostringstream s;
        s << "FlowParams(tau=" << p.tau() << ", rho=" << p.rho() << ")";
        return s.str();
      });

  m.def("s_tau", &s_tau, py::arg("x"), py::arg("tau"));
  m.def("kummer_1", &kummer_1, py::arg("u"));
  m.def("damped_kummer", &damped_kummer, py::arg("u"));
  m.def("lambda_tensor", &lambda_tensor, py::arg("x"), py::arg("t"));
  m.def("gamma_kernel", &gamma_kernel, py::arg("y"), py::arg("z"), py::arg("t"),
        py::arg("params") = FlowParams(1, 1));

  m.def(
      "z_tensor",
      [](const Vec3& y, const Vec3& z, const FlowParams& p, double rel_tol, double abs_tol) {
        return z_pair(z_tensor(y, z, p, spec_of(rel_tol, abs_tol)));
      },
      py::arg("y"), py::arg("z"), py::arg("params") = FlowParams(1, 1),
      py::arg("rel_tol") = 1e-6, py::arg("abs_tol") = 1e-10,
      "(value, error estimate) of the time-integrated kernel");
  m.def(
      "z_derivative",
      [](const Vec3& y, const Vec3& z, const std::array<int, 3>& alpha,
         const std::array<int, 3>& beta, const FlowParams& p, double rel_tol, double abs_tol) {
        return z_pair(z_derivative(y, z, p, index_of(alpha), index_of(beta),
                                   spec_of(rel_tol, abs_tol)));
      },
      py::arg("y"), py::arg("z"), py::arg("alpha") = std::array<int, 3>{0, 0, 0},
      py::arg("beta") = std::array<int, 3>{0, 0, 0}, py::arg("params") = FlowParams(1, 1),
      py::arg("rel_tol") = 1e-6, py::arg("abs_tol") = 1e-10);
  m.def(
      "z_difference",
      [](const Vec3& x, const Vec3& y, const std::array<int, 3>& alpha, const FlowParams& p,
         double rel_tol, double abs_tol) {
        return z_pair(z_difference(x, y, p, index_of(alpha), spec_of(rel_tol, abs_tol)));
      },
      py::arg("x"), py::arg("y"), py::arg("alpha") = std::array<int, 3>{0, 0, 0},
      py::arg("params") = FlowParams(1, 1), py::arg("rel_tol") = 1e-6, py::arg("abs_tol") = 1e-10);
  m.def(
      "majorant_time_integral",
      [](const Vec3& y, const Vec3& z, double nu, const FlowParams& p, double rel_tol) {
        const ScalarIntegral v = majorant_time_integral(y, z, nu, p, spec_of(rel_tol, 1e-10));
        return py::make_tuple(v.value, v.error);
      },
      py::arg("y"), py::arg("z"), py::arg("nu"), py::arg("params") = FlowParams(1, 1),
      py::arg("rel_tol") = 1e-6);

  m.def(
      "predict_exponents",
      [](double a, double b, double c, double d) {
        const ConvExponents e = predict_exponents(ConvInput{a, b, c, d});
        py::dict out;
        out["e"] = e.e;
        out["f"] = e.f;
        out["log_power"] = e.log_power;
        out["contributing_region"] = e.contributing_region;
        return out;
      },
      py::arg("a"), py::arg("b"), py::arg("c"), py::arg("d"));
  m.def(
      "gamma_case",
      [](double g) {
        const GammaCase gc = gamma_case(g);
        return py::make_tuple(gc.c_out, gc.d_out, gc.k_out);
      },
      py::arg("gamma"));
  m.def(
      "convolve_numeric",
      [](double a, double b, double c, double d, const Vec3& x, std::int64_t budget,
         std::uint64_t seed) {
        py::gil_scoped_release release;
        const ConvEstimate e = convolve_numeric(ConvInput{a, b, c, d}, x, budget, seed);
        return std::make_pair(e.value, e.std_error);
      },
      py::arg("a"), py::arg("b"), py::arg("c"), py::arg("d"), py::arg("x"),
      py::arg("budget") = 1 << 16, py::arg("seed") = 1);

  m.def(
      "synthetic_coefficients",
      [](const FlowParams& p, bool include_nonlinear) {
        const cli::SyntheticDataset d = cli::synthetic_dataset(p);
        const ExpansionCoeffs c = beta_coefficients(d.mesh, d.data, d.force, p, include_nonlinear);
        py::dict out;
        out["beta"] = c.beta();
        out["flux"] = c.flux;
        out["beta_linear"] = c.beta_linear;
        out["beta_nonlinear"] = c.beta_nonlinear;
        return out;
      },
      py::arg("params") = FlowParams(1, 1), py::arg("include_nonlinear") = true,
      "expansion coefficients of the built-in synthetic dataset");
  m.def(
      "leading_term",
      [](const Vec3& x, const Vec3& beta, double flux, const FlowParams& p, double rel_tol) {
        ExpansionCoeffs c;
        c.beta1 = beta[0];
        c.beta2 = beta[1];
        c.beta3 = beta[2];
        c.flux = flux;
        const ExpansionValue v = leading_term(x, {}, c, p, spec_of(rel_tol, 1e-10));
        return py::make_tuple(v.value, v.error);
      },
      py::arg("x"), py::arg("beta"), py::arg("flux") = 0.0, py::arg("params") = FlowParams(1, 1),
      py::arg("rel_tol") = 1e-6);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<std::string> argv{"oseen-rotor"};
        argv.insert(argv.end(), args.begin(), args.end());
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::run(argv, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "run the command-line front end in-process: (exit code, stdout, stderr)");
}
