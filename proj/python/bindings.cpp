#include "dppphd/config.hpp"
#include "dppphd/dpp_filter.hpp"
#include "dppphd/errors.hpp"
#include "dppphd/harness.hpp"
#include "dppphd/kernel_core.hpp"
#include "dppphd/metrics.hpp"
#include "dppphd/oracle_check.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

namespace py = pybind11;
using namespace dppphd;

namespace {

DiscretizedKernel make_kernel(const Eigen::MatrixXd& entries, const std::optional<Eigen::VectorXd>& weights) {
    if (entries.rows() != entries.cols()) throw std::invalid_argument("kernel must be square");
    DiscretizedKernel k;
    k.grid = GridSpec::unit(entries.rows());
    if (weights) {
        if (weights->size() != entries.rows()) throw std::invalid_argument("one weight per grid point");
        k.grid.weights = *weights;
    }
    k.entries = entries;
    return k;
}

PointSet to_points(const Eigen::MatrixXd& m) {
    if (m.size() > 0 && m.cols() != 2) throw std::invalid_argument("points must be an (n, 2) array");
    PointSet out;
    for (Index i = 0; i < m.rows(); ++i) out.emplace_back(m(i, 0), m(i, 1));
    return out;
}

py::dict check_dict(const CheckResult& r) {
    py::dict d;
    d["name"] = r.name;
    d["passed"] = r.passed;
    d["max_error"] = r.max_error;
    d["tolerance"] = r.tolerance;
    d["seconds"] = r.seconds;
    return d;
}

ExperimentConfig config_from_text(const std::string& text) {
    std::istringstream is(text);
    ExperimentConfig c = parse_config(is);
    c.validate();
    return c;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Determinantal and Poisson PHD filters, exact small-grid oracle and tracking metrics.";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<UnknownPreset>(m, "UnknownPreset", PyExc_KeyError);
    py::register_exception<SpectrumError>(m, "SpectrumError", PyExc_ArithmeticError);
    py::register_exception<EmptySet>(m, "EmptySet", PyExc_ValueError);

    m.def("build_id", &build_id);

    m.def(
        "interaction_kernel",
        [](const Eigen::MatrixXd& k, const std::optional<Eigen::VectorXd>& weights, double delta) {
            KernelOptions opt;
            opt.delta = delta;
            return interaction_kernel(make_kernel(k, weights), opt).entries;
        },
        py::arg("k"), py::arg("weights") = py::none(), py::arg("delta") = 1e-3,
        "J = (I - K)^-1 K for a correlation kernel given as densities on a weighted grid.");
    m.def(
        "determinantal_moments",
        [](const Eigen::MatrixXd& k, const std::optional<Eigen::VectorXd>& weights) {
            const MomentPair mp = determinantal_moments(make_kernel(k, weights));
            return py::make_tuple(mp.intensity, mp.pair_factorial);
        },
        py::arg("k"), py::arg("weights") = py::none(), "(intensity, pair density) of the determinantal process.");
    m.def(
        "project_kernel",
        [](const Eigen::MatrixXd& k, double delta) {
            KernelOptions opt;
            opt.delta = delta;
            return project_kernel(k, KernelKind::correlation, opt).entries;
        },
        py::arg("k"), py::arg("delta") = 1e-3, "Nearest symmetric kernel with spectrum in [0, 1 - delta].");

    m.def(
        "ospa",
        [](const Eigen::MatrixXd& truth, const Eigen::MatrixXd& est, double c, double p) {
            return ospa(to_points(truth), to_points(est), c, p);
        },
        py::arg("truth"), py::arg("est"), py::arg("c") = 100.0, py::arg("p") = 2.0);
    m.def(
        "omat",
        [](const Eigen::MatrixXd& truth, const Eigen::MatrixXd& est, double p) {
            return omat(to_points(truth), to_points(est), p);
        },
        py::arg("truth"), py::arg("est"), py::arg("p") = 2.0);
    m.def(
        "hungarian",
        [](const Eigen::MatrixXd& cost) {
            const Assignment a = hungarian(cost);
            return py::make_tuple(a.row_to_col, a.cost);
        },
        py::arg("cost"));

    m.def("poisson_reduction_check", [] { return check_dict(poisson_reduction_check()); });
    m.def(
        "oracle_equivalence_check",
        [](std::uint64_t seed, int cases) { return check_dict(oracle_equivalence_check(seed, cases)); },
        py::arg("seed") = 7, py::arg("cases") = 20);

    m.def("preset_names", &preset_names);
    m.def(
        "preset_config",
        [](const std::string& name, bool full) {
            std::ostringstream os;
            write_config(os, preset(name, full));
            return os.str();
        },
        py::arg("name"), py::arg("full") = false, "Preset as config-file text.");
    m.def(
        "run_config",
        [](const std::string& text, bool write_outputs) {
            const ExperimentConfig c = config_from_text(text);
            ExperimentResult r;
            {
                py::gil_scoped_release release;
                r = run_experiment(c, write_outputs);
            }
            std::ostringstream steps, summary;
            write_steps_csv(steps, r);
            write_summary_csv(summary, r);
            py::dict d;
            d["steps_csv"] = steps.str();
            d["summary_csv"] = summary.str();
            return d;
        },
        py::arg("config"), py::arg("write_outputs") = false,
        "Runs an experiment from config-file text; returns the steps and summary CSV text.");
}
