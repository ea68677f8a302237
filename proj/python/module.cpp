#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>

#include "parid/config.hpp"
#include "parid/engine.hpp"
#include "parid/error.hpp"
#include "parid/experiment.hpp"
#include "parid/theory.hpp"
#include "parid/weights.hpp"

namespace py = pybind11;

namespace {

parid::ModelParams make_params(const std::string& weights, double delta, std::uint64_t t_max, std::uint64_t seed,
                               const std::string& rule, bool sequential_update) {
    parid::ModelParams p;
    p.weights = parid::WeightDistribution::parse(weights);
    p.delta = delta;
    p.t_max = t_max;
    p.seed = seed;
    p.rule = parid::parse_rule(rule);
    p.sequential_update = sequential_update;
    p.validate();
    return p;
}

py::dict stats_dict(const parid::EmpiricalStats& s) {
    py::dict d;
    d["t"] = s.t;
    d["edges"] = s.edges;
    d["counts"] = s.counts;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Preferential attachment with random initial degrees";
    m.attr("__version__") = std::string(parid::kVersion);

    py::register_exception<parid::ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<parid::PreconditionError>(m, "PreconditionError", PyExc_ValueError);
    py::register_exception<parid::UnsupportedRegime>(m, "UnsupportedRegime", PyExc_ValueError);

    py::class_<parid::WeightDistribution>(m, "WeightDistribution")
        .def_static("parse", &parid::WeightDistribution::parse, py::arg("spec"))
        .def_static("constant", &parid::WeightDistribution::constant, py::arg("m"))
        .def_static("zeta", &parid::WeightDistribution::zeta, py::arg("tau"), py::arg("k_min") = 1)
        .def("pmf", &parid::WeightDistribution::pmf, py::arg("k"))
        .def("ccdf", &parid::WeightDistribution::ccdf, py::arg("x"))
        .def_property_readonly("mean", &parid::WeightDistribution::mean)
        .def_property_readonly("min_support", &parid::WeightDistribution::min_support)
        .def("samples",
             [](const parid::WeightDistribution& w, std::size_t n, std::uint64_t seed) {
                 parid::Stream rng(seed, 0, parid::Stream::kWeights);
                 std::vector<std::uint64_t> out(n);
                 for (auto& x : out) {
                     x = w.sample(rng);
                 }
                 return out;
             },
             py::arg("n"), py::arg("seed") = 0)
        .def("__str__", &parid::WeightDistribution::to_string)
        .def("__repr__", [](const parid::WeightDistribution& w) { return "WeightDistribution('" + w.to_string() + "')"; });

    m.def(
        "limit_pk",
        [](const std::string& weights, double delta, std::uint64_t k_max) {
            const auto d = parid::limit_pk(parid::WeightDistribution::parse(weights), delta, k_max);
            py::dict out;
            out["p"] = d.p;
            out["theta"] = d.theta;
            out["tail_mass"] = d.tail_mass;
            out["tau_w"] = d.tau_w;
            out["tau_p"] = d.tau_p;
            out["tau"] = d.tau;
            return out;
        },
        py::arg("weights"), py::arg("delta"), py::arg("k_max") = 1000,
        "Limiting degree distribution p_0..p_k_max (p_0 = 0) with theta, exponents and truncated tail mass.");
    m.def("closed_form_constant", &parid::closed_form_constant, py::arg("m"), py::arg("delta"), py::arg("k"));
    m.def(
        "exponents",
        [](const std::string& weights, double delta) {
            const auto e = parid::exponents(parid::WeightDistribution::parse(weights), delta);
            return py::make_tuple(e.tau_w, e.tau_p, e.tau);
        },
        py::arg("weights"), py::arg("delta"), "(tau_W, tau_P, tau); the last two are None for infinite-mean weights.");

    m.def(
        "generate",
        [](const std::string& weights, double delta, std::uint64_t t_max, std::uint64_t seed,
           std::vector<std::uint64_t> snapshots, std::uint64_t replication, const std::string& rule,
           bool sequential_update) {
            const auto p = make_params(weights, delta, t_max, seed, rule, sequential_update);
            if (snapshots.empty()) {
                snapshots.push_back(t_max);
            }
            parid::RunResult res = [&] {
                py::gil_scoped_release release;
                return parid::run(p, snapshots, replication);
            }();
            py::list hist;
            for (const auto& s : res.snapshots) {
                hist.append(stats_dict(s));
            }
            py::dict out;
            out["snapshots"] = hist;
            const auto d = res.final_state.degrees();
            const auto w = res.final_state.initial_degrees();
            out["degrees"] = std::vector<std::uint64_t>(d.begin(), d.end());
            out["initial_degrees"] = std::vector<std::uint64_t>(w.begin(), w.end());
            return out;
        },
        py::arg("weights"), py::arg("delta"), py::arg("t_max"), py::arg("seed") = 0,
        py::arg("snapshots") = std::vector<std::uint64_t>{}, py::arg("replication") = 0, py::arg("rule") = "parid",
        py::arg("sequential_update") = false,
        "One replication: degree histograms at the snapshot times plus final degrees.");

    m.def(
        "verify",
        [](const std::string& config_text, const std::string& out_dir, unsigned workers) {
            const auto parsed = parid::parse_config(config_text);
            if (!parsed.ok()) {
                std::string msg;
                for (const auto& e : parsed.errors) {
                    msg += "line " + std::to_string(e.line) + ": " + e.message + "\n";
                }
                throw parid::ConfigError(msg);
            }
            auto spec = *parsed.spec;
            if (!out_dir.empty()) {
                spec.out_dir = out_dir;
            }
            parid::ExperimentOutcome outcome = [&] {
                py::gil_scoped_release release;
                return parid::run_experiment(spec, {workers == 0 ? parid::default_workers() : workers});
            }();
            py::list analyses;
            for (const auto& a : outcome.analyses) {
                py::dict d;
                d["name"] = a.name;
                d["pass"] = a.pass;
                d["detail"] = py::module_::import("json").attr("loads")(a.detail_json);
                analyses.append(d);
            }
            py::dict out;
            out["directory"] = outcome.directory.string();
            out["pass"] = outcome.pass();
            out["analyses"] = analyses;
            return out;
        },
        py::arg("config_text"), py::arg("out_dir") = "", py::arg("workers") = 0,
        "Runs an experiment config and returns each analysis verdict.");
}
