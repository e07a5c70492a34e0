#include "hybridmg/error.hpp"
#include "hybridmg/experiment.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <sstream>

namespace py = pybind11;
using namespace hybridmg;

namespace {

ExperimentConfig config_from_text(const std::string& text) {
    std::istringstream in(text);
    return experiment_config(ConfigFile::parse(in));
}

py::dict row_dict(const ResultRow& r) {
    py::dict d;
    d["p"] = r.order;
    d["levels"] = r.levels;
    d["mode"] = mode_name(r.mode);
    d["iterations"] = r.iterations;
    d["status"] = status_name(r.status);
    d["residual"] = r.residual;
    d["seconds"] = r.seconds;
    return d;
}

// One assembled sweep cell: trace system plus its multigrid hierarchy.
struct Instance {
    ExperimentConfig cfg;
    ExampleInstance inst;
    TraceSystem sys;
    std::unique_ptr<MGHierarchy> mg;

    Instance(ExperimentConfig c, int order, int levels) : cfg(std::move(c)) {
        inst = make_instance(cfg, order, levels);
        sys = assemble_trace(inst.mesh, inst.problem, inst.method);
    }

    const MGHierarchy& hierarchy() {
        if (!mg) mg = std::make_unique<MGHierarchy>(sys, inst.hierarchy, cfg.mg);
        return *mg;
    }

    SolveResult solve(const std::string& mode) {
        switch (parse_mode(mode)) {
        case SolveMode::MG: return mg_solve(sys, hierarchy(), cfg.tol, cfg.maxit);
        case SolveMode::GmresMG: return gmres_solve(sys, &hierarchy(), cfg.tol, cfg.maxit);
        case SolveMode::Gmres: break;
        }
        return gmres_solve(sys, nullptr, cfg.tol, cfg.maxit);
    }
};

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Multigrid for hybridized finite element trace systems";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<TopologyError>(m, "TopologyError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::class_<ExperimentConfig>(m, "Config")
        .def_static("load", &load_experiment_config, py::arg("path"))
        .def_static("parse", &config_from_text, py::arg("text"))
        .def_property_readonly("example", [](const ExperimentConfig& c) { return example_name(c.example); })
        .def_property_readonly("scheme", [](const ExperimentConfig& c) { return scheme_name(c.scheme); })
        .def_property_readonly("smoother", [](const ExperimentConfig& c) { return smoother_name(c.mg.smoother.kind); })
        .def_readwrite("orders", &ExperimentConfig::orders)
        .def_readwrite("levels", &ExperimentConfig::levels)
        .def_readwrite("tol", &ExperimentConfig::tol)
        .def_readwrite("maxit", &ExperimentConfig::maxit);

    m.def("run", [](const ExperimentConfig& cfg) {
        py::list out;
        for (const auto& r : run_experiment(cfg)) out.append(row_dict(r));
        return out;
    }, py::arg("config"), "Iteration counts over the configured (p, levels) sweep.");

    m.def("converge", [](const ExperimentConfig& cfg) {
        py::list out;
        for (const auto& r : run_convergence(cfg)) {
            py::dict d;
            d["p"] = r.order;
            d["cells"] = r.cells;
            d["h"] = r.h;
            d["error"] = r.error;
            d["rate"] = r.rate;
            out.append(d);
        }
        return out;
    }, py::arg("config"));

    m.def("snapped_split", &snapped_split, py::arg("n"));

    py::class_<SolveResult>(m, "SolveResult")
        .def_readonly("x", &SolveResult::x)
        .def_readonly("iterations", &SolveResult::iterations)
        .def_readonly("residual", &SolveResult::residual)
        .def_readonly("history", &SolveResult::history)
        .def_property_readonly("status", [](const SolveResult& r) { return status_name(r.status); });

    py::class_<Instance>(m, "Instance")
        .def(py::init<ExperimentConfig, int, int>(), py::arg("config"), py::arg("order"), py::arg("levels"))
        .def_property_readonly("size", [](const Instance& i) { return i.sys.size(); })
        .def_property_readonly("num_elements", [](const Instance& i) { return i.inst.mesh->num_elements(); })
        .def_property_readonly("matrix", [](const Instance& i) { return i.sys.A.to_sparse(); })
        .def_property_readonly("rhs", [](const Instance& i) { return i.sys.g; })
        .def_property_readonly("num_levels", [](Instance& i) { return i.hierarchy().num_levels(); })
        .def("level_size", [](Instance& i, int k) { return i.hierarchy().level(k).size(); }, py::arg("level"))
        .def("solve", &Instance::solve, py::arg("mode") = "gmres+mg")
        .def("solve_direct", [](const Instance& i) { return solve_direct(i.sys); })
        .def("vcycle", [](Instance& i, const Eigen::VectorXd& r) { return i.hierarchy().apply_preconditioner(r); },
             py::arg("residual"))
        .def("l2_error", [](const Instance& i, const Eigen::VectorXd& lambda) {
            if (!i.inst.problem.exact) throw ConfigError("this example has no exact solution");
            return l2_error(i.sys, recover_volume(i.sys, lambda), i.inst.problem.exact);
        }, py::arg("trace"))
        .def("conservation_defects", [](const Instance& i, const Eigen::VectorXd& lambda) {
            Eigen::VectorXd d(i.inst.mesh->num_elements());
            for (int e = 0; e < d.size(); ++e) d[e] = conservation_defect(i.sys, e, lambda);
            return d;
        }, py::arg("trace"));
}
