// Copyright 2026 The weakpovm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Python bindings. Structured inputs and results cross the boundary as JSON
// text in the same schema the command-line tool reads and writes.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "weakpovm/cli.hpp"
#include "weakpovm/error.hpp"
#include "weakpovm/io.hpp"
#include "weakpovm/trajectory.hpp"

namespace py = pybind11;
using namespace weakpovm;

namespace {

Povm parse_povm(const std::string& text) { return povm_from_json(Json::parse(text)); }

WalkConfig walk_config(double phi, double eps, int max_steps) {
    WalkConfig cfg;
    cfg.phi = phi;
    cfg.epsilon_vertex = eps;
    cfg.max_steps = max_steps;
    cfg.validate();
    return cfg;
}

std::string validate(const std::string& povm) { return povm_to_json(parse_povm(povm)).dump(); }

std::vector<double> born(const std::string& povm, const std::string& state) {
    return born_probabilities(parse_povm(povm), state_from_json(Json::parse(state)).rho);
}

std::string decompose(const std::string& povm) { return tree_to_json(decompose_to_lipovms(parse_povm(povm))).dump(); }

std::string ppovm(const std::string& povm) { return plan_to_json(to_ppovm(parse_povm(povm))).dump(); }

std::string simulate(const std::string& povm, const std::string& state, double phi, double eps, int max_steps,
                     std::int64_t trajectories, std::uint64_t seed, int threads) {
    const Povm p = parse_povm(povm);
    const StateSpec s = state_from_json(Json::parse(state));
    PipelineOptions opts;
    opts.seed = seed;
    opts.trajectories = trajectories;
    opts.threads = threads;
    PipelineResult r;
    {
        py::gil_scoped_release release;
        r = run_pipeline(p, s.source(), walk_config(phi, eps, max_steps), opts);
    }
    return statistics_to_json(r.stats).dump();
}

std::string oracle(const std::string& povm, const std::string& state, double phi, double eps, int depth,
                   bool include_strings) {
    const StateSpec s = state_from_json(Json::parse(state));
    if (s.kind != StateSpec::Kind::pure) {
        throw Error(ErrorKind::validation, "the oracle needs a pure state");
    }
    const PpovmPlan plan = to_ppovm(parse_povm(povm));
    OracleReport r;
    {
        py::gil_scoped_release release;
        r = oracle_enumerate(plan, s.psi, walk_config(phi, eps, 0), depth);
    }
    return oracle_to_json(r, include_strings).dump();
}

int cli(std::vector<std::string> args) {
    args.insert(args.begin(), "weakpovm");
    std::vector<char*> argv;
    for (auto& a : args) {
        argv.push_back(a.data());
    }
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Qubit POVM simulation by destructive weak measurements";

    static py::handle error_type = py::exception<Error>(m, "WeakPovmError", PyExc_ValueError).release();
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) {
                std::rethrow_exception(p);
            }
        } catch (const Error& e) {
            py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
            exc.attr("kind") = std::string(to_string(e.kind()));
            PyErr_SetObject(error_type.ptr(), exc.ptr());
        } catch (const Json::exception& e) {
            py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
            exc.attr("kind") = std::string(to_string(ErrorKind::parse));
            PyErr_SetObject(error_type.ptr(), exc.ptr());
        }
    });

    m.attr("__version__") = "0.1.0";
    m.def("validate_json", &validate, py::arg("povm"));
    m.def("born_json", &born, py::arg("povm"), py::arg("state"));
    m.def("decompose_json", &decompose, py::arg("povm"));
    m.def("ppovm_json", &ppovm, py::arg("povm"));
    m.def("simulate_json", &simulate, py::arg("povm"), py::arg("state"), py::arg("phi"), py::arg("eps"),
          py::arg("max_steps"), py::arg("trajectories"), py::arg("seed"), py::arg("threads"));
    m.def("oracle_json", &oracle, py::arg("povm"), py::arg("state"), py::arg("phi"), py::arg("eps"),
          py::arg("depth"), py::arg("include_strings"));
    m.def("run_cli", &cli, py::arg("args"), "Run the command-line tool in-process; returns the exit code.");
    m.def(
        "inv_sqrt_psd", [](const Matrix2& a) { return inv_sqrt_psd(HermitianOp::from_matrix(a)).matrix(); },
        py::arg("a"));
    m.def("destructive_bloch_length", &destructive_bloch_length, py::arg("nz"), py::arg("phi"));
    m.def("default_max_steps", &default_max_steps, py::arg("phi"), py::arg("epsilon_vertex"));
}
