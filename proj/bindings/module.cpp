#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "fraclab/cube_tree.hpp"
#include "fraclab/dim_est.hpp"
#include "fraclab/errors.hpp"
#include "fraclab/experiments.hpp"
#include "fraclab/ifs.hpp"
#include "fraclab/json_io.hpp"
#include "fraclab/mass_builder.hpp"
#include "fraclab/metric_space.hpp"

namespace py = pybind11;
using namespace fraclab;
using jsonio::json;

namespace {

json parse(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ArgumentError(std::string("invalid JSON for ") + what + ": " + e.what());
    }
}

IfsSystem ifs_from(const std::string& text) { return IfsSystem::load_json(parse(text, "ifs")); }

FiniteMetricSpace space_from(const std::string& text) {
    return FiniteMetricSpace::load_json(parse(text, "space"));
}

SweepConfig sweep_from(const std::string& text) {
    return SweepConfig::load_json(parse(text, "sweep"));
}

DimMode mode_from(const std::string& name) {
    if (name == "assouad") return DimMode::kAssouad;
    if (name == "lower") return DimMode::kLower;
    if (name == "upper_reg") return DimMode::kUpperReg;
    if (name == "lower_reg") return DimMode::kLowerReg;
    throw ArgumentError("unknown mode \"" + name + "\" (expected assouad|lower|upper_reg|lower_reg)");
}

std::string dump(const json& j) { return jsonio::canonical_dump(j); }

}  // namespace

PYBIND11_MODULE(_fraclab, m) {
    m.doc() = "fraclab core bindings; JSON strings in, JSON strings out";

    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ArgumentError& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const DegenerateInputError& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        }
    });

    m.def(
        "similarity_dimension",
        [](const std::string& ifs) { return similarity_dimension(ifs_from(ifs)); },
        py::arg("ifs_json"));

    m.def(
        "attractor_points",
        [](const std::string& ifs, double delta, std::size_t budget) {
            return dump(attractor_points(ifs_from(ifs), delta, budget).to_json());
        },
        py::arg("ifs_json"), py::arg("delta"), py::arg("budget") = 1'000'000);

    m.def(
        "inhomogeneous_points",
        [](const std::string& ifs, double delta, std::size_t budget) {
            return dump(inhomogeneous_points(ifs_from(ifs), delta, budget).to_json());
        },
        py::arg("ifs_json"), py::arg("delta"), py::arg("budget") = 4'000'000);

    m.def(
        "stopping_words",
        [](const std::string& ifs, double rho, std::size_t budget) {
            std::vector<std::string> out;
            for (const Word& w : stopping_words(ifs_from(ifs), rho, budget))
                out.push_back(word_to_string(w));
            return out;
        },
        py::arg("ifs_json"), py::arg("rho"), py::arg("budget") = 1'000'000);

    m.def(
        "check_cosc",
        [](const std::string& ifs) { return dump(check_cosc(ifs_from(ifs)).to_json()); },
        py::arg("ifs_json"));

    m.def(
        "cube_tree",
        [](const std::string& space, double rho, int depth, bool verify) {
            const FiniteMetricSpace sp = space_from(space);
            const CubeTree tree = CubeTree::build(sp, rho, depth);
            json j = tree.to_json();
            if (verify) j["report"] = tree.verify().to_json();
            return dump(j);
        },
        py::arg("space_json"), py::arg("rho"), py::arg("depth"), py::arg("verify") = false);

    m.def(
        "build_mass",
        [](const std::string& space, double rho, int depth, double t, double s, double c0, int M,
           bool doubling) {
            const FiniteMetricSpace sp = space_from(space);
            const CubeTree tree = CubeTree::build(sp, rho, depth);
            MassParams params;
            params.t = t;
            params.s = s;
            params.c0 = c0;
            params.M = M;
            const MassDistribution mass =
                doubling ? build_mass_doubling(tree, params) : build_mass(tree, params);
            return dump(mass.to_json());
        },
        py::arg("space_json"), py::arg("rho"), py::arg("depth"), py::arg("t"), py::arg("s"),
        py::arg("c0"), py::arg("M") = 0, py::arg("doubling") = false);

    m.def(
        "estimate_counting",
        [](const std::string& space, const std::string& mode, const std::string& sweep) {
            const FiniteMetricSpace sp = space_from(space);
            const SweepConfig cfg = sweep_from(sweep);
            const DimMode dm = mode_from(mode);
            if (dm == DimMode::kAssouad) return dump(assouad_estimate(sp, cfg).to_json());
            if (dm == DimMode::kLower) return dump(lower_estimate(sp, cfg).to_json());
            throw ArgumentError("counting estimate supports modes assouad|lower");
        },
        py::arg("space_json"), py::arg("mode"), py::arg("sweep_json"));

    m.def(
        "estimate_measure",
        [](const std::string& cloud, const std::string& mode, const std::string& sweep) {
            const WeightedCloud wc = WeightedCloud::load_json(parse(cloud, "cloud"));
            const SweepConfig cfg = sweep_from(sweep);
            const DimMode dm = mode_from(mode);
            if (dm == DimMode::kUpperReg) return dump(upper_reg_estimate(wc, cfg).to_json());
            if (dm == DimMode::kLowerReg) return dump(lower_reg_estimate(wc, cfg).to_json());
            throw ArgumentError("measure estimate supports modes upper_reg|lower_reg");
        },
        py::arg("cloud_json"), py::arg("mode"), py::arg("sweep_json"));

    m.def(
        "default_ratio_grid",
        [](const std::string& space, double guard, double min_lever) {
            return default_ratio_grid(space_from(space), guard, min_lever);
        },
        py::arg("space_json"), py::arg("guard") = 10.0, py::arg("min_lever") = 16.0);

    m.def(
        "run_experiment",
        [](const std::string& config, int jobs, bool force) {
            return dump(run_experiment_config(parse(config, "experiment config"), jobs, force)
                            .to_json());
        },
        py::arg("config_json"), py::arg("jobs") = 0, py::arg("force") = false);
}
