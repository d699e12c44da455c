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

#include "weakpovm/io.hpp"

#include <fstream>
#include <sstream>

#include "weakpovm/error.hpp"

namespace weakpovm {

namespace {

[[noreturn]] void parse_fail(const std::string& where, const std::string& what) {
    throw Error(ErrorKind::parse, where + ": " + what);
}

const Json& field(const Json& j, const char* key, const std::string& where) {
    if (!j.is_object()) {
        parse_fail(where, "expected an object");
    }
    const auto it = j.find(key);
    if (it == j.end()) {
        parse_fail(where, std::string("missing field \"") + key + "\"");
    }
    return *it;
}

double number(const Json& j, const std::string& where) {
    if (!j.is_number()) {
        parse_fail(where, "expected a number");
    }
    return j.get<double>();
}

template <class T>
T integer(const Json& j, const std::string& where) {
    if (!j.is_number_integer()) {
        parse_fail(where, "expected an integer");
    }
    return j.get<T>();
}

bool boolean(const Json& j, const std::string& where) {
    if (!j.is_boolean()) {
        parse_fail(where, "expected true or false");
    }
    return j.get<bool>();
}

const Json& array(const Json& j, std::size_t size, const std::string& where) {
    if (!j.is_array() || (size != 0 && j.size() != size)) {
        std::ostringstream os;
        os << "expected an array";
        if (size != 0) {
            os << " of length " << size;
        }
        parse_fail(where, os.str());
    }
    return j;
}

Json doubles(const std::vector<double>& v) { return Json(v); }

std::vector<double> doubles_from(const Json& j, const std::string& where) {
    std::vector<double> out;
    for (std::size_t i = 0; i < array(j, 0, where).size(); ++i) {
        out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
    }
    return out;
}

Json matrix_rows(const Eigen::MatrixXd& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row.push_back(m(i, j));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_rows_from(const Json& j, const std::string& where) {
    const auto rows = array(j, 0, where).size();
    if (rows == 0) {
        return {};
    }
    const auto cols = array(j[0], 0, where).size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        const auto row = doubles_from(array(j[i], cols, where), where);
        for (std::size_t c = 0; c < cols; ++c) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = row[c];
        }
    }
    return m;
}

HermitianOp hermitian_from_json(const Json& j, const std::string& where, const Tolerances& tol) {
    const Matrix2 m = matrix_from_json(j, where);
    for (int r = 0; r < 2; ++r) {
        for (int c = r; c < 2; ++c) {
            const double gap = std::abs(m(r, c) - std::conj(m(c, r)));
            if (gap > tol.hermitian) {
                std::ostringstream os;
                os << "not Hermitian at entry (" << r << ", " << c << "): " << m(r, c) << " vs conj of " << m(c, r);
                throw Error(ErrorKind::validation, where + " " + os.str());
            }
        }
    }
    return HermitianOp::hermitian_part(m);
}

// Reads a Hermitian operator written by matrix_to_json without re-validating.
HermitianOp stored_hermitian(const Json& j, const std::string& where) {
    return HermitianOp::hermitian_part(matrix_from_json(j, where));
}

Povm stored_povm(const Json& j, const std::string& where) {
    Povm p;
    const Json& elems = array(field(j, "elements", where), 0, where + ".elements");
    for (std::size_t i = 0; i < elems.size(); ++i) {
        p.elements.push_back(stored_hermitian(elems[i], where + ".elements[" + std::to_string(i) + "]"));
    }
    for (const auto& l : array(field(j, "labels", where), p.size(), where + ".labels")) {
        p.labels.push_back(integer<int>(l, where + ".labels"));
    }
    return p;
}

}  // namespace

// ---------------------------------------------------------------------------
// Primitives

Json complex_to_json(const Complex& z) { return Json::array({z.real(), z.imag()}); }

Complex complex_from_json(const Json& j, const std::string& where) {
    if (j.is_number()) {
        return {j.get<double>(), 0.0};
    }
    array(j, 2, where);
    return {number(j[0], where), number(j[1], where)};
}

Json ket_to_json(const Ket& k) { return Json::array({complex_to_json(k(0)), complex_to_json(k(1))}); }

Ket ket_from_json(const Json& j, const std::string& where) {
    array(j, 2, where);
    return {complex_from_json(j[0], where + "[0]"), complex_from_json(j[1], where + "[1]")};
}

Json matrix_to_json(const Matrix2& m) {
    Json rows = Json::array();
    for (int r = 0; r < 2; ++r) {
        rows.push_back(Json::array({complex_to_json(m(r, 0)), complex_to_json(m(r, 1))}));
    }
    return rows;
}

Matrix2 matrix_from_json(const Json& j, const std::string& where) {
    array(j, 2, where);
    Matrix2 m;
    for (int r = 0; r < 2; ++r) {
        const Json& row = array(j[static_cast<std::size_t>(r)], 2, where);
        for (int c = 0; c < 2; ++c) {
            std::ostringstream entry;
            entry << where << "[" << r << "][" << c << "]";
            m(r, c) = complex_from_json(row[static_cast<std::size_t>(c)], entry.str());
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// POVMs and states

Json povm_to_json(const Povm& p) {
    Json elems = Json::array();
    for (const auto& e : p.elements) {
        elems.push_back(matrix_to_json(e.matrix()));
    }
    return Json{{"elements", std::move(elems)}, {"labels", p.labels}};
}

Povm povm_from_json(const Json& j, const Tolerances& tol) {
    const Json& elems = array(field(j, "elements", "povm"), 0, "povm.elements");
    std::vector<HermitianOp> elements;
    for (std::size_t i = 0; i < elems.size(); ++i) {
        elements.push_back(hermitian_from_json(elems[i], "element " + std::to_string(i), tol));
    }
    std::vector<int> labels;
    if (const auto it = j.find("labels"); it != j.end() && !it->is_null()) {
        for (const auto& l : array(*it, 0, "povm.labels")) {
            labels.push_back(integer<int>(l, "povm.labels"));
        }
    }
    return validate_povm(std::move(elements), std::move(labels), tol);
}

Povm load_povm_file(const std::string& path, const Tolerances& tol) { return povm_from_json(read_json_file(path), tol); }

StateSpec StateSpec::from_pure(const Ket& psi) {
    if (std::abs(psi.norm() - 1.0) > 1e-10) {
        std::ostringstream os;
        os << "pure state must be normalised; norm is " << psi.norm();
        throw Error(ErrorKind::validation, os.str());
    }
    StateSpec s;
    s.kind = Kind::pure;
    s.psi = psi;
    s.rho = HermitianOp::outer(psi);
    return s;
}

StateSpec StateSpec::from_density(const HermitianOp& rho) {
    validate_state(rho);
    StateSpec s;
    s.kind = Kind::density;
    s.rho = rho;
    return s;
}

StateSpec StateSpec::uniformly_mixed() {
    StateSpec s;
    s.kind = Kind::uniformly_mixed;
    s.rho = HermitianOp::identity() * 0.5;
    return s;
}

StateSource StateSpec::source() const {
    switch (kind) {
        case Kind::pure:
            return StateSource::pure(psi);
        case Kind::density:
            return StateSource::density(rho);
        case Kind::uniformly_mixed:
            return StateSource::uniformly_mixed();
    }
    throw Error(ErrorKind::internal, "unknown state kind");
}

Json state_to_json(const StateSpec& s) {
    switch (s.kind) {
        case StateSpec::Kind::pure:
            return Json{{"pure", ket_to_json(s.psi)}};
        case StateSpec::Kind::density:
            return Json{{"density", matrix_to_json(s.rho.matrix())}};
        case StateSpec::Kind::uniformly_mixed:
            return Json{{"mixed", "uniform"}};
    }
    throw Error(ErrorKind::internal, "unknown state kind");
}

StateSpec state_from_json(const Json& j, const Tolerances& tol) {
    if (!j.is_object()) {
        parse_fail("state", "expected an object");
    }
    if (const auto it = j.find("pure"); it != j.end()) {
        return StateSpec::from_pure(ket_from_json(*it, "state.pure"));
    }
    if (const auto it = j.find("density"); it != j.end()) {
        return StateSpec::from_density(hermitian_from_json(*it, "state.density", tol));
    }
    if (const auto it = j.find("mixed"); it != j.end()) {
        if (*it != "uniform") {
            parse_fail("state.mixed", "only \"uniform\" is supported");
        }
        return StateSpec::uniformly_mixed();
    }
    parse_fail("state", "expected one of \"pure\", \"density\", \"mixed\"");
}

StateSpec load_state_file(const std::string& path, const Tolerances& tol) {
    return state_from_json(read_json_file(path), tol);
}

// ---------------------------------------------------------------------------
// Configuration and artifacts

Json walk_config_to_json(const WalkConfig& cfg) {
    return Json{{"phi", cfg.phi},
                {"epsilon_vertex", cfg.epsilon_vertex},
                {"max_steps", cfg.max_steps},
                {"resolved_max_steps", cfg.resolved_max_steps()},
                {"check_invariants", cfg.check_invariants}};
}

WalkConfig walk_config_from_json(const Json& j) {
    WalkConfig cfg;
    cfg.phi = number(field(j, "phi", "walk"), "walk.phi");
    cfg.epsilon_vertex = number(field(j, "epsilon_vertex", "walk"), "walk.epsilon_vertex");
    cfg.max_steps = integer<int>(field(j, "max_steps", "walk"), "walk.max_steps");
    if (const auto it = j.find("check_invariants"); it != j.end()) {
        cfg.check_invariants = boolean(*it, "walk.check_invariants");
    }
    cfg.validate();
    return cfg;
}

Json tree_to_json(const LipovmTree& tree) {
    Json nodes = Json::array();
    for (const auto& node : tree.nodes) {
        Json n;
        n["leaf"] = node.leaf ? povm_to_json(*node.leaf) : Json(nullptr);
        if (node.witness) {
            n["witness"] = Json{{"c", node.witness->c}, {"order", node.witness->order}};
        } else {
            n["witness"] = nullptr;
        }
        n["child_a"] = node.child_a;
        n["child_b"] = node.child_b;
        n["prob_a"] = node.prob_a;
        n["prob_b"] = node.prob_b;
        nodes.push_back(std::move(n));
    }
    Json leaves = Json::array();
    for (const auto& leaf : tree.leaves()) {
        leaves.push_back(Json{{"node", leaf.node}, {"probability", leaf.probability}, {"labels", leaf.povm->labels}});
    }
    return Json{{"num_outcomes", tree.num_outcomes}, {"nodes", std::move(nodes)}, {"leaves", std::move(leaves)}};
}

LipovmTree tree_from_json(const Json& j) {
    LipovmTree tree;
    tree.num_outcomes = integer<int>(field(j, "num_outcomes", "tree"), "tree.num_outcomes");
    const Json& nodes = array(field(j, "nodes", "tree"), 0, "tree.nodes");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const std::string where = "tree.nodes[" + std::to_string(i) + "]";
        const Json& n = nodes[i];
        LipovmTree::Node node;
        if (const Json& leaf = field(n, "leaf", where); !leaf.is_null()) {
            node.leaf = stored_povm(leaf, where + ".leaf");
        }
        if (const Json& w = field(n, "witness", where); !w.is_null()) {
            DependenceWitness witness;
            witness.c = doubles_from(field(w, "c", where), where + ".witness.c");
            for (const auto& o : array(field(w, "order", where), 0, where + ".witness.order")) {
                witness.order.push_back(integer<std::size_t>(o, where + ".witness.order"));
            }
            node.witness = std::move(witness);
        }
        node.child_a = integer<int>(field(n, "child_a", where), where);
        node.child_b = integer<int>(field(n, "child_b", where), where);
        node.prob_a = number(field(n, "prob_a", where), where);
        node.prob_b = number(field(n, "prob_b", where), where);
        const auto count = static_cast<int>(nodes.size());
        if (node.child_a >= count || node.child_b >= count) {
            parse_fail(where, "child index out of range");
        }
        tree.nodes.push_back(std::move(node));
    }
    return tree;
}

Json plan_to_json(const PpovmPlan& plan) {
    Json projective = Json::array();
    for (const auto& p : plan.projective) {
        projective.push_back(matrix_to_json(p.matrix()));
    }
    Json eigen = Json::array();
    for (const auto& e : plan.eigen) {
        eigen.push_back(Json{{"a", e.a}, {"b", e.b}, {"a_vec", ket_to_json(e.a_vec)}});
    }
    return Json{{"source", povm_to_json(plan.source)},
                {"projective", std::move(projective)},
                {"eigen", std::move(eigen)},
                {"conditional", matrix_rows(plan.conditional)},
                {"active", plan.active}};
}

PpovmPlan plan_from_json(const Json& j) {
    PpovmPlan plan;
    plan.source = stored_povm(field(j, "source", "plan"), "plan.source");
    const Json& projective = array(field(j, "projective", "plan"), 0, "plan.projective");
    for (std::size_t i = 0; i < projective.size(); ++i) {
        plan.projective.push_back(stored_hermitian(projective[i], "plan.projective[" + std::to_string(i) + "]"));
    }
    for (const auto& e : array(field(j, "eigen", "plan"), 0, "plan.eigen")) {
        PpovmPlan::EigenData d;
        d.a = number(field(e, "a", "plan.eigen"), "plan.eigen.a");
        d.b = number(field(e, "b", "plan.eigen"), "plan.eigen.b");
        d.a_vec = ket_from_json(field(e, "a_vec", "plan.eigen"), "plan.eigen.a_vec");
        plan.eigen.push_back(d);
    }
    plan.conditional = matrix_rows_from(field(j, "conditional", "plan"), "plan.conditional");
    for (const auto& a : array(field(j, "active", "plan"), 0, "plan.active")) {
        plan.active.push_back(integer<int>(a, "plan.active"));
    }
    return plan;
}

Json statistics_to_json(const OutcomeStatistics& s) {
    return Json{{"counts", s.counts},
                {"total", s.total},
                {"non_converged", s.non_converged},
                {"frequencies", doubles(s.frequencies)},
                {"reference", doubles(s.reference)},
                {"standard_error", doubles(s.standard_error)},
                {"mean_steps", s.mean_steps},
                {"max_steps", s.max_steps},
                {"mean_fidelity", s.mean_fidelity}};
}

OutcomeStatistics statistics_from_json(const Json& j) {
    OutcomeStatistics s;
    for (const auto& c : array(field(j, "counts", "statistics"), 0, "statistics.counts")) {
        s.counts.push_back(integer<std::int64_t>(c, "statistics.counts"));
    }
    s.total = integer<std::int64_t>(field(j, "total", "statistics"), "statistics.total");
    s.non_converged = integer<std::int64_t>(field(j, "non_converged", "statistics"), "statistics.non_converged");
    s.frequencies = doubles_from(field(j, "frequencies", "statistics"), "statistics.frequencies");
    s.reference = doubles_from(field(j, "reference", "statistics"), "statistics.reference");
    s.standard_error = doubles_from(field(j, "standard_error", "statistics"), "statistics.standard_error");
    s.mean_steps = number(field(j, "mean_steps", "statistics"), "statistics.mean_steps");
    s.max_steps = integer<int>(field(j, "max_steps", "statistics"), "statistics.max_steps");
    s.mean_fidelity = number(field(j, "mean_fidelity", "statistics"), "statistics.mean_fidelity");
    return s;
}

Json oracle_to_json(const OracleReport& r, bool include_strings) {
    Json j{{"depth", r.depth},
           {"outcomes", r.outcomes},
           {"vertex_mass", r.vertex_mass},
           {"label_mass", r.label_mass},
           {"terminated_mass", doubles(r.terminated_mass)},
           {"tv_distance", doubles(r.tv_distance)},
           {"reference", doubles(r.reference)},
           {"total_probability", r.total_probability},
           {"pruned_probability", r.pruned_probability},
           {"max_consistency_residual", r.max_consistency_residual},
           {"string_count", r.string_count}};
    if (include_strings) {
        Json strings = Json::array();
        for (const auto& s : r.strings) {
            strings.push_back(Json{{"code", s.code},
                                   {"length", s.length},
                                   {"probability", s.probability},
                                   {"direct_probability", s.direct_probability},
                                   {"vertex", s.vertex},
                                   {"terminated", s.terminated}});
        }
        j["strings"] = std::move(strings);
    }
    return j;
}

OracleReport oracle_from_json(const Json& j) {
    OracleReport r;
    r.depth = integer<int>(field(j, "depth", "oracle"), "oracle.depth");
    r.outcomes = integer<int>(field(j, "outcomes", "oracle"), "oracle.outcomes");
    for (const auto& row : array(field(j, "vertex_mass", "oracle"), 0, "oracle.vertex_mass")) {
        r.vertex_mass.push_back(doubles_from(row, "oracle.vertex_mass"));
    }
    for (const auto& row : array(field(j, "label_mass", "oracle"), 0, "oracle.label_mass")) {
        r.label_mass.push_back(doubles_from(row, "oracle.label_mass"));
    }
    r.terminated_mass = doubles_from(field(j, "terminated_mass", "oracle"), "oracle.terminated_mass");
    r.tv_distance = doubles_from(field(j, "tv_distance", "oracle"), "oracle.tv_distance");
    r.reference = doubles_from(field(j, "reference", "oracle"), "oracle.reference");
    r.total_probability = number(field(j, "total_probability", "oracle"), "oracle.total_probability");
    r.pruned_probability = number(field(j, "pruned_probability", "oracle"), "oracle.pruned_probability");
    r.max_consistency_residual =
        number(field(j, "max_consistency_residual", "oracle"), "oracle.max_consistency_residual");
    r.string_count = integer<std::size_t>(field(j, "string_count", "oracle"), "oracle.string_count");
    if (const auto it = j.find("strings"); it != j.end()) {
        for (const auto& s : array(*it, 0, "oracle.strings")) {
            OracleString o;
            o.code = integer<std::uint64_t>(field(s, "code", "oracle.strings"), "oracle.strings.code");
            o.length = integer<int>(field(s, "length", "oracle.strings"), "oracle.strings.length");
            o.probability = number(field(s, "probability", "oracle.strings"), "oracle.strings.probability");
            o.direct_probability =
                number(field(s, "direct_probability", "oracle.strings"), "oracle.strings.direct_probability");
            o.vertex = integer<int>(field(s, "vertex", "oracle.strings"), "oracle.strings.vertex");
            o.terminated = boolean(field(s, "terminated", "oracle.strings"), "oracle.strings.terminated");
            r.strings.push_back(o);
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Files

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::parse, "cannot open " + path);
    }
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorKind::parse, path + ": " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorKind::parse, "cannot write " + path);
    }
    out << text;
    if (!out) {
        throw Error(ErrorKind::parse, "failed while writing " + path);
    }
}

}  // namespace weakpovm
