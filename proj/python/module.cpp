#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ned/dichotomy.hpp"
#include "ned/errors.hpp"
#include "ned/gallery.hpp"
#include "ned/io.hpp"
#include "ned/parabolic.hpp"
#include "ned/robustness.hpp"

namespace py = pybind11;
using namespace ned;

namespace {

std::string dump(const Json& j) { return j.dump(); }

GridSpec grid_for(const EvolutionProcess& p, const std::string& side, double horizon, double step) {
    return GridSpec::horizon(parse_domain(side), horizon, step).restricted(p.domain());
}

}  // namespace

PYBIND11_MODULE(_ned_lab, m) {
    m.doc() = "Nonuniform exponential dichotomies: processes, certificates, robustness";

    auto base = py::register_exception<Error>(m, "NedError", PyExc_RuntimeError);
    py::register_exception<ArgumentError>(m, "ArgumentError", base.ptr());
    py::register_exception<ContractError>(m, "ContractError", base.ptr());
    py::register_exception<InapplicableError>(m, "InapplicableError", base.ptr());
    py::register_exception<NumericError>(m, "NumericError", base.ptr());

    py::class_<EvolutionProcess>(m, "Process")
        .def_property_readonly("dimension", &EvolutionProcess::dimension)
        .def_property_readonly("domain", [](const EvolutionProcess& p) { return to_string(p.domain()); })
        .def_property_readonly("invertible", &EvolutionProcess::invertible)
        .def_property_readonly("backend", [](const EvolutionProcess& p) { return to_string(p.backend()); })
        .def_property_readonly("name", &EvolutionProcess::name)
        .def("matrix", &EvolutionProcess::matrix, py::arg("t"), py::arg("s"))
        .def("apply", &EvolutionProcess::apply, py::arg("t"), py::arg("s"), py::arg("x"))
        .def("operator_norm",
             [](const EvolutionProcess& p, double t, double s) { return operator_norm(p, t, s); })
        .def("log_operator_norm",
             [](const EvolutionProcess& p, double t, double s) { return log_operator_norm(p, t, s); })
        .def("dual", [](const EvolutionProcess& p) { return dual_process(p); });

    m.def("gallery_names", &gallery_names);
    m.def(
        "gallery_process",
        [](const std::string& name, const std::map<std::string, double>& params) {
            return gallery_entry(name, {params.begin(), params.end()}).process;
        },
        py::arg("name"), py::arg("params") = std::map<std::string, double>{});
    m.def(
        "gallery_claims_json",
        [](const std::string& name, const std::map<std::string, double>& params) {
            Json a = Json::array();
            for (const auto& c : gallery_entry(name, {params.begin(), params.end()}).claims) a.push_back(to_json(c));
            return dump(a);
        },
        py::arg("name"), py::arg("params") = std::map<std::string, double>{});
    m.def("process_from_json", [](const std::string& s) { return process_from_json(Json::parse(s)).process; });
    m.def(
        "planted_process",
        [](const std::string& domain, const Eigen::MatrixXd& V, std::vector<double> breaks,
           std::vector<std::vector<double>> rates, std::vector<bool> unstable) {
            return planted_process(parse_domain(domain), V, std::move(breaks), std::move(rates), std::move(unstable));
        },
        py::arg("domain"), py::arg("V"), py::arg("breaks"), py::arg("rates"), py::arg("unstable"));

    m.def(
        "check_certificate_json",
        [](const EvolutionProcess& p, const std::string& cert, double horizon, double step) {
            const auto c = certificate_from_json(Json::parse(cert), p.split_family());
            return dump(to_json(check_certificate(p, c, grid_for(p, to_string(c.domain), horizon, step))));
        },
        py::arg("process"), py::arg("certificate"), py::arg("horizon") = 40.0, py::arg("step") = 0.25);
    m.def("convert_halfline_json", [](const std::string& cert) {
        return dump(to_json(convert_halfline(certificate_from_json(Json::parse(cert)))));
    });
    m.def("dual_certificate_json", [](const std::string& cert) {
        return dump(to_json(dual_certificate(certificate_from_json(Json::parse(cert)))));
    });
    m.def(
        "classify_json",
        [](const EvolutionProcess& p, const std::string& projection, const std::string& side, double horizon,
           double step) {
            const auto proj = ProjectionFamily::of_kind(parse_projection(projection), p.dimension());
            return dump(to_json(classify(p, proj, parse_domain(side), grid_for(p, side, horizon, step))));
        },
        py::arg("process"), py::arg("projection") = "zero", py::arg("side") = "full", py::arg("horizon") = 10.0,
        py::arg("step") = 0.25);
    m.def(
        "robustness_json",
        [](double M, double omega, double upsilon, double eps, std::optional<double> L) {
            auto r = robustness_constants(M, omega, upsilon, eps);
            r.L = L;
            return dump(to_json(r));
        },
        py::arg("M"), py::arg("omega"), py::arg("upsilon"), py::arg("eps"), py::arg("L") = py::none());
    m.def("dirichlet_eigenvalue", [](int k, int N, double L) { return dirichlet_eigenvalue(k, Grid1D{L, N}); },
          py::arg("k"), py::arg("N") = 31, py::arg("L") = 1.0);
    m.def("discrete_laplacian_eigenvalues",
          [](int N, const std::string& bc, double robin_alpha) {
              return Eigen::VectorXd(discretize(Grid1D{1.0, N}, {parse_boundary(bc), robin_alpha}).eigenvalues);
          },
          py::arg("N") = 31, py::arg("bc") = "dirichlet", py::arg("robin_alpha") = 0.0);
}
