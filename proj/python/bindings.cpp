#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "froglab/brw.hpp"
#include "froglab/experiments.hpp"
#include "froglab/hitting.hpp"
#include "froglab/oned.hpp"
#include "froglab/percolation.hpp"
#include "froglab/renorm.hpp"

namespace py = pybind11;
using namespace froglab;

namespace {

py::dict ci_dict(const MeanCi& m) {
    py::dict d;
    d["mean"] = m.mean;
    d["stderr"] = m.stderr_;
    d["low"] = m.low;
    d["high"] = m.high;
    d["n"] = m.n;
    return d;
}

Point to_point(const std::vector<int>& v) {
    if (v.empty() || v.size() > static_cast<std::size_t>(kMaxDim)) throw std::invalid_argument("bad point dimension");
    Point p(static_cast<int>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) p[static_cast<int>(i)] = v[i];
    return p;
}

py::object json_to_py(const std::string& text) { return py::module_::import("json").attr("loads")(text); }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "froglab simulation core";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    m.def("hyperplane_hit_exact", &hyperplane_hit_exact, py::arg("alpha"), py::arg("n"));

    m.def(
        "exact_hit_probability",
        [](int d, double w, double alpha, double hold, std::vector<int> start, std::vector<std::vector<int>> targets,
           int radius, bool absorbing) {
            TargetSet ts;
            for (const auto& t : targets) ts.add(to_point(t));
            const auto box = LatticeBox::cube(d, radius, absorbing ? BoundaryMode::absorbing : BoundaryMode::killing);
            const TransitionKernel k = d == 1 ? TransitionKernel::one_dim(alpha) : TransitionKernel{d, w, alpha, hold};
            return exact_hit_solver(k, to_point(start), ts, box).probability;
        },
        py::arg("d"), py::arg("w"), py::arg("alpha"), py::arg("hold"), py::arg("start"), py::arg("targets"),
        py::arg("radius"), py::arg("absorbing") = false,
        "Probability that the walk from `start` reaches one of `targets` inside the cube of `radius`.");

    m.def(
        "mc_hit_probability",
        [](int d, double w, double alpha, double hold, std::vector<int> start, std::vector<std::vector<int>> targets,
           int radius, bool absorbing, std::int64_t trials, std::uint64_t seed) {
            TargetSet ts;
            for (const auto& t : targets) ts.add(to_point(t));
            const auto box = LatticeBox::cube(d, radius, absorbing ? BoundaryMode::absorbing : BoundaryMode::killing);
            const TransitionKernel k = d == 1 ? TransitionKernel::one_dim(alpha) : TransitionKernel{d, w, alpha, hold};
            py::gil_scoped_release release;
            const auto e = mc_hit_estimate(k, to_point(start), ts, default_max_steps(box), trials, RngStream(seed), &box);
            return std::pair{e.estimate, e.stderr_};
        },
        py::arg("d"), py::arg("w"), py::arg("alpha"), py::arg("hold"), py::arg("start"), py::arg("targets"),
        py::arg("radius"), py::arg("absorbing") = false, py::arg("trials") = 10000, py::arg("seed") = 1,
        "Monte Carlo (estimate, stderr) for the same event as exact_hit_probability.");

    m.def(
        "left_hit_probability",
        [](const std::string& kind, double parameter) {
            return left_hit_probability_exact(kind == "drift" ? LeftHitModel::drift(parameter)
                                                              : LeftHitModel::death(parameter));
        },
        py::arg("kind"), py::arg("parameter"));
    m.def("k0_threshold", &k0_threshold, py::arg("p"));
    m.def("mu_exact_1d", &mu_exact_1d, py::arg("alpha"), py::arg("theta"), py::arg("mean_xi"));
    m.def("reference_brw_boundary", &reference_brw_boundary, py::arg("alpha"));

    m.def(
        "sample_xi",
        [](double w, std::int64_t cap, std::uint64_t seed) { return sample_xi(w, cap, RngStream(seed)).count; },
        py::arg("w"), py::arg("cap") = 100000, py::arg("seed") = 1);

    m.def(
        "certify_transience",
        [](int d, double w, double alpha, const std::string& strategy, std::int64_t budget, std::uint64_t seed) {
            std::string text;
            {
                py::gil_scoped_release release;
                text = certify_transience(d, w, alpha, parse_strategy(strategy), budget, RngStream(seed)).to_json();
            }
            return json_to_py(text);
        },
        py::arg("d"), py::arg("w"), py::arg("alpha"), py::arg("strategy") = "lines", py::arg("budget") = 4000,
        py::arg("seed") = 1, "Certificate as a dict.");

    m.def(
        "estimate_pc",
        [](int d, std::vector<int> sizes, std::int64_t trials, std::uint64_t seed) {
            PcEstimate e;
            {
                py::gil_scoped_release release;
                e = estimate_pc(d, sizes, trials, RngStream(seed));
            }
            py::dict out;
            out["estimate"] = e.estimate;
            out["low"] = e.low;
            out["high"] = e.high;
            out["flagged"] = e.flagged;
            return out;
        },
        py::arg("d"), py::arg("box_sizes"), py::arg("trials") = 200, py::arg("seed") = 1);

    m.def(
        "block_open_probability",
        [](int d, int K, double w, double alpha, double survival, std::int64_t trials, std::uint64_t seed) {
            MeanCi r;
            {
                py::gil_scoped_release release;
                r = renorm_open_probability(RenormScheme::cube(d, K), TransitionKernel{d, w, alpha, 0.0}, survival,
                                            trials, RngStream(seed));
            }
            return ci_dict(r);
        },
        py::arg("d"), py::arg("K"), py::arg("w"), py::arg("alpha"), py::arg("survival") = 1.0,
        py::arg("trials") = 200, py::arg("seed") = 1);

    m.def(
        "run_sweep",
        [](const std::string& config_json) {
            std::string text;
            {
                py::gil_scoped_release release;
                text = results_json(run_sweep(validate_config_text(config_json)));
            }
            return json_to_py(text);
        },
        py::arg("config_json"), "Run (or resume) a sweep; returns the results document as a dict.");
}
