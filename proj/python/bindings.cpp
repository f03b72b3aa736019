#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "shield/checks.hpp"
#include "shield/config.hpp"
#include "shield/experiments.hpp"
#include "shield/qp.hpp"
#include "shield/sampler.hpp"
#include "shield/schedule.hpp"

namespace py = pybind11;
using namespace shield;

namespace {

py::dict summary_dict(const RunSummary& s) {
    py::dict d;
    d["min_h_tilde"] = s.min_h_tilde;
    d["final_h"] = s.final_h;
    d["total_energy"] = s.total_energy;
    d["kl_estimate"] = s.kl_estimate;
    d["kl_stderr"] = s.kl_stderr;
    d["violations"] = s.violations;
    d["energy_first_half_fraction"] = s.energy_first_half_fraction;
    d["wall_ms"] = s.wall_ms;
    return d;
}

SampleMode mode_from_name(const std::string& name) {
    if (name == "guided") return SampleMode::Guided;
    if (name == "unguided") return SampleMode::Unguided;
    if (name == "projection") return SampleMode::Projection;
    if (name == "forced") return SampleMode::ForcedControl;
    throw ValidationError("unknown sample mode \"" + name + "\"");
}

QpSolver solver_from_name(const std::string& name) {
    if (name == "auto") return QpSolver::Auto;
    if (name == "closed_form") return QpSolver::ClosedForm;
    if (name == "dual_ascent") return QpSolver::DualAscent;
    throw ValidationError("unknown solver \"" + name + "\"");
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "safe diffusion sampling: constricting-tube barrier guidance";

    // configuration mistakes surface as ValueError; runtime aborts stay RuntimeError
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ConfigError& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        }
    });

    m.def("epsilon_init", &epsilon_init, py::arg("h_terminal"), py::arg("c"),
          "per-row tube radius from the terminal draw's violation plus margin c");

    py::class_<ConstrictionSchedule>(m, "Schedule")
        .def_static("linear", &ConstrictionSchedule::linear)
        .def_static("exponential", &ConstrictionSchedule::exponential, py::arg("rate") = 2.0)
        .def_static("polynomial", &ConstrictionSchedule::polynomial, py::arg("power"))
        .def("eval", &ConstrictionSchedule::eval, py::arg("eps0"), py::arg("t"), py::arg("T"))
        .def("deriv", &ConstrictionSchedule::deriv, py::arg("eps0"), py::arg("t"), py::arg("T"))
        .def_property_readonly("name", &ConstrictionSchedule::name)
        .def_property_readonly("param", &ConstrictionSchedule::param);

    m.def(
        "solve_min_norm",
        [](const Mat& A, const Vec& b, const std::string& solver) {
            if (A.rows() != b.size())
                throw ValidationError("A and b must have the same number of rows");
            QPInstance qp(static_cast<int>(A.cols()));
            for (long r = 0; r < A.rows(); ++r) qp.add_row(A.row(r).transpose(), b[r]);
            QpResult res = solve_min_norm(qp, solver_from_name(solver));
            py::dict d;
            d["u"] = res.u;
            d["lam"] = res.lambda;
            d["method"] = std::string(qp_method_name(res.method));
            d["iterations"] = res.iterations;
            return d;
        },
        py::arg("A"), py::arg("b"), py::arg("solver") = "auto",
        "min |u| subject to A u >= b; returns u, multipliers, and the method used");

    m.def(
        "default_config",
        [](const std::string& name) { return serialize_config(default_config(name)); },
        py::arg("experiment"), "canonical JSON text for a named experiment preset");

    m.def(
        "canonicalize_config",
        [](const std::string& text) { return serialize_config(parse_config_text(text)); },
        py::arg("config_text"), "parse, validate, and re-serialize a config");

    m.def(
        "run",
        [](const std::string& config_text, int threads, bool write_output) {
            ExperimentConfig cfg = parse_config_text(config_text);
            ExperimentResult res = run_experiment(cfg, threads, write_output);
            py::dict out;
            out[mode_dir_name(res.main.mode)] = summary_dict(res.main.summary);
            if (res.unconstrained) out["unguided"] = summary_dict(res.unconstrained->summary);
            if (res.projection) out["projection"] = summary_dict(res.projection->summary);
            if (res.cap) {
                py::dict cap;
                cap["eps_ref"] = res.cap->eps_ref;
                cap["c_eff"] = res.cap->c_eff;
                cap["kappa"] = res.cap->gamma.kappa;
                out["cap_tracking"] = cap;
            }
            return out;
        },
        py::arg("config_text"), py::arg("threads") = 1, py::arg("write_output") = false,
        "run an experiment (plus configured baselines); returns per-mode summaries");

    m.def(
        "final_samples",
        [](const std::string& config_text, const std::string& mode, int threads) {
            ExperimentConfig cfg = parse_config_text(config_text);
            SamplerSetup setup = build_setup(cfg);
            auto records = sample_paths(setup, mode_from_name(mode), cfg.n_paths, threads);
            if (records.empty() || !records.front().has_states)
                throw ValidationError("final_samples needs runs small enough to retain states");
            const long dim = records.front().states.cols();
            Mat finals(static_cast<long>(records.size()), dim);
            for (std::size_t p = 0; p < records.size(); ++p)
                finals.row(static_cast<long>(p)) = records[p].states.bottomRows(1);
            return finals;
        },
        py::arg("config_text"), py::arg("mode") = "guided", py::arg("threads") = 1,
        "sample n_paths trajectories and return the final states, one row per path");

    m.def(
        "qp_check",
        [](std::uint64_t seed, int n_single, int n_multi) {
            QpSuiteReport r = qp_equivalence_suite(seed, n_single, n_multi);
            py::dict d;
            d["n_single"] = r.n_single;
            d["n_multi"] = r.n_multi;
            d["max_diff_single"] = r.max_diff_single;
            d["max_diff_multi"] = r.max_diff_multi;
            d["max_feasibility_viol"] = r.max_feasibility_viol;
            d["max_complementarity"] = r.max_complementarity;
            d["pass"] = r.pass;
            return d;
        },
        py::arg("seed") = 7, py::arg("n_single") = 1000, py::arg("n_multi") = 200);

    m.def(
        "grad_check",
        [](std::uint64_t seed) {
            py::list out;
            for (const auto& e : grad_check_suite(seed)) {
                py::dict d;
                d["name"] = e.name;
                d["error"] = e.error;
                d["tol"] = e.tol;
                d["pass"] = e.pass;
                out.append(d);
            }
            return out;
        },
        py::arg("seed") = 7);

    m.def(
        "kl_check",
        [](int n_paths, std::uint64_t seed, int threads) {
            py::list out;
            for (const auto& e : kl_check_suite(n_paths, seed, threads)) {
                py::dict d;
                d["u"] = e.u;
                d["g"] = e.g;
                d["T"] = e.T;
                d["expected"] = e.expected;
                d["estimate"] = e.estimate;
                d["std_error"] = e.std_error;
                d["rel_error"] = e.rel_error;
                d["pass"] = e.pass;
                out.append(d);
            }
            return out;
        },
        py::arg("n_paths") = 2000, py::arg("seed") = 7, py::arg("threads") = 1);
}
