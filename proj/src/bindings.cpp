// Python bindings for the core operations: model windows, theory constants,
// truncated spectra, and the small-deviation estimators.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <string>
#include <vector>

#include "smalldev/config.hpp"
#include "smalldev/errors.hpp"
#include "smalldev/model.hpp"
#include "smalldev/smallball.hpp"
#include "smalldev/spectrum.hpp"
#include "smalldev/theory.hpp"
#include "smalldev/version.hpp"

namespace py = pybind11;
using namespace smalldev;

namespace {

MASpec spec_from_args(const std::string& kind, double rho, double scale, double a0,
                      const std::vector<double>& coeffs, int offset) {
    if (kind == "iid") return IID{a0};
    if (kind == "ar1") return AR1{rho, scale};
    if (kind == "two_sided_geometric") return TwoSidedGeometric{rho, scale};
    if (kind == "finite_ma") return FiniteMA{coeffs, offset};
    if (kind == "explicit") return ExplicitCoeffs{coeffs, offset};
    throw DomainError("unknown model kind: " + kind);
}

py::dict estimate_dict(const SmallDevEstimate& est) {
    py::dict d;
    d["log_prob"] = est.log_prob;
    d["method"] = est.method;
    d["std_err"] = est.std_err ? py::object(py::float_(*est.std_err)) : py::none();
    d["saddle_t"] = est.saddle_t ? py::object(py::float_(*est.saddle_t)) : py::none();
    d["samples"] = est.samples ? py::object(py::int_(*est.samples)) : py::none();
    d["seed"] = est.seed ? py::object(py::int_(*est.seed)) : py::none();
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "weighted moving-average small-deviation toolkit";
    m.attr("__version__") = version;

    py::register_exception<Error>(m, "Error");

    py::class_<CoefficientWindow>(m, "Window")
        .def_readonly("coeffs", &CoefficientWindow::coeffs)
        .def_readonly("offset", &CoefficientWindow::offset)
        .def_readonly("tail_mass", &CoefficientWindow::tail_mass)
        .def("half_width", &CoefficientWindow::half_width)
        .def("at", &CoefficientWindow::at, py::arg("m"))
        .def("__len__", [](const CoefficientWindow& w) { return w.coeffs.size(); })
        .def("__repr__", [](const CoefficientWindow& w) {
            return "Window(length=" + std::to_string(w.length()) +
                   ", offset=" + std::to_string(w.offset) + ")";
        });

    py::class_<WeightSequence>(m, "Weights")
        .def(py::init([](double p, double d_plus, double d_minus,
                         const std::map<int, double>& override) {
                 WeightSequence w{p, d_plus, d_minus, override};
                 validate(w);
                 return w;
             }),
             py::arg("p") = 1.0, py::arg("d_plus") = 1.0, py::arg("d_minus") = 1.0,
             py::arg("override") = std::map<int, double>{})
        .def_readonly("p", &WeightSequence::p)
        .def_readonly("d_plus", &WeightSequence::d_plus)
        .def_readonly("d_minus", &WeightSequence::d_minus)
        .def("at", [](const WeightSequence& w, int k) { return weight_at(w, k); },
             py::arg("k"));

    py::class_<Spectrum>(m, "Spectrum")
        .def_readonly("N", &Spectrum::N)
        .def_readonly("L", &Spectrum::L)
        .def_readonly("eigenvalues", &Spectrum::eigenvalues)
        .def("sum", &Spectrum::sum)
        .def("counting", [](const Spectrum& s, double thr) { return counting_function(s, thr); },
             py::arg("s"))
        .def("fit",
             [](const Spectrum& s, double p, int n_lo, int n_hi, int stride) {
                 const FitResult f = fit_decay_constant(s, p, n_lo, n_hi, stride);
                 py::dict d;
                 d["c_hat"] = f.c_hat;
                 d["dispersion"] = f.dispersion;
                 d["n_lo"] = f.n_lo;
                 d["n_hi"] = f.n_hi;
                 d["stride"] = f.stride;
                 d["edge_warning"] = f.edge_warning;
                 return d;
             },
             py::arg("p"), py::arg("n_lo"), py::arg("n_hi"), py::arg("stride") = 1)
        .def("__len__", [](const Spectrum& s) { return s.eigenvalues.size(); });

    m.def(
        "window_of",
        [](const std::string& kind, double rho, double scale, double a0,
           const std::vector<double>& coeffs, int offset, double tol) {
            return materialize(spec_from_args(kind, rho, scale, a0, coeffs, offset), tol);
        },
        py::arg("kind"), py::kw_only(), py::arg("rho") = 0.5, py::arg("scale") = 1.0,
        py::arg("a0") = 1.0, py::arg("coeffs") = std::vector<double>{},
        py::arg("offset") = 0, py::arg("tol") = 1e-12,
        "Finite coefficient window for the named model.");

    m.def("autocovariance", &autocovariance, py::arg("window"), py::arg("lag"));

    m.def(
        "theory_constants",
        [](const CoefficientWindow& window, const WeightSequence& w, double rel_tol,
           bool certified) {
            const TheoryConstants tc = theory_constants(window, w, rel_tol, certified);
            py::dict d;
            d["p"] = tc.p;
            d["B_p"] = tc.B_p;
            d["C"] = tc.C;
            d["delta_mu"] = tc.delta_mu;
            d["sd_exponent"] = tc.sd_exponent;
            d["heavy_tail_warning"] = tc.heavy_tail_warning;
            d["quadrature_grid"] = tc.quadrature.grid;
            return d;
        },
        py::arg("window"), py::arg("weights"), py::arg("rel_tol") = 1e-10,
        py::arg("certified") = true);

    m.def("constant_Bp", &constant_Bp, py::arg("p"));
    m.def("predicted_eigenvalue", &predicted_eigenvalue, py::arg("n"), py::arg("C"),
          py::arg("p"));
    m.def("predicted_log_smalldev", &predicted_log_smalldev, py::arg("p"), py::arg("C"),
          py::arg("eps"));

    m.def(
        "spectrum",
        [](const CoefficientWindow& window, const WeightSequence& w, int N) {
            return spectrum(build(window, w, N));
        },
        py::arg("window"), py::arg("weights"), py::arg("N"),
        "Eigenvalues of the order-N truncation, sorted nonincreasing.");

    m.def(
        "saddlepoint",
        [](const std::vector<double>& lambdas, double eps, bool corrected) {
            return estimate_dict(saddlepoint_log_prob(
                lambdas, eps, corrected ? SaddleOrder::corrected : SaddleOrder::leading));
        },
        py::arg("lambdas"), py::arg("eps"), py::arg("corrected") = true);

    m.def(
        "tilted_mc",
        [](const std::vector<double>& lambdas, double eps, std::int64_t samples,
           std::uint64_t seed, int workers) {
            return estimate_dict(tilted_mc_log_prob(lambdas, eps, samples, seed, workers));
        },
        py::arg("lambdas"), py::arg("eps"), py::arg("samples"), py::arg("seed"),
        py::arg("workers") = 0);

    m.def(
        "exact_small_case",
        [](const std::vector<double>& lambdas, double eps) {
            return estimate_dict(exact_small_case_log_prob(lambdas, eps));
        },
        py::arg("lambdas"), py::arg("eps"));

    m.def(
        "direct_sim",
        [](const CoefficientWindow& window, const WeightSequence& w, int N, double eps,
           std::int64_t samples, std::uint64_t seed, int workers) {
            return estimate_dict(direct_sim_log_prob(window, w, N, eps, samples, seed, workers));
        },
        py::arg("window"), py::arg("weights"), py::arg("N"), py::arg("eps"),
        py::arg("samples"), py::arg("seed"), py::arg("workers") = 0);
}
