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

#include "weakpovm/povm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "weakpovm/error.hpp"

namespace weakpovm {

namespace {

constexpr int kMaxSplitDepth = 32;

HermitianOp element_sum(const std::vector<HermitianOp>& elements) {
    HermitianOp sum;
    for (const auto& e : elements) {
        sum += e;
    }
    return sum;
}

HermitianOp weighted_sum(const Povm& p, const std::vector<double>& c) {
    HermitianOp sum;
    for (std::size_t i = 0; i < p.size(); ++i) {
        sum += c[i] * p.elements[i];
    }
    return sum;
}

// Coordinates of a Hermitian matrix in the real basis {I, sx, sy, sz}/2-scaled.
Eigen::Vector4d hermitian_coordinates(const HermitianOp& h) {
    const Matrix2& m = h.matrix();
    return {0.5 * (m(0, 0).real() + m(1, 1).real()), m(0, 1).real(), -m(0, 1).imag(),
            0.5 * (m(0, 0).real() - m(1, 1).real())};
}

int build_tree(LipovmTree& tree, Povm p, int depth, const Tolerances& tol) {
    if (depth > kMaxSplitDepth) {
        throw Error(ErrorKind::internal, "POVM decomposition exceeded the maximum split depth");
    }
    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    auto witness = find_dependence(p, tol);
    if (!witness) {
        tree.nodes[static_cast<std::size_t>(index)].leaf = std::move(p);
        return index;
    }
    SplitResult split = split_once(p, *witness, tol);
    const int a = build_tree(tree, std::move(split.a), depth + 1, tol);
    const int b = build_tree(tree, std::move(split.b), depth + 1, tol);
    auto& node = tree.nodes[static_cast<std::size_t>(index)];
    node.witness = std::move(*witness);
    node.child_a = a;
    node.child_b = b;
    node.prob_a = split.prob_a;
    node.prob_b = split.prob_b;
    return index;
}

}  // namespace

Povm validate_povm(std::vector<HermitianOp> elements, std::vector<int> labels, const Tolerances& tol) {
    if (elements.empty()) {
        throw Error(ErrorKind::validation, "a POVM needs at least one element");
    }
    if (labels.empty()) {
        labels.resize(elements.size());
        std::iota(labels.begin(), labels.end(), 0);
    }
    if (labels.size() != elements.size()) {
        throw Error(ErrorKind::validation, "label count does not match element count");
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0) {
            std::ostringstream os;
            os << "element " << i << " has negative label " << labels[i];
            throw Error(ErrorKind::validation, os.str());
        }
    }
    for (std::size_t i = 0; i < elements.size(); ++i) {
        if (!elements[i].matrix().allFinite()) {
            std::ostringstream os;
            os << "element " << i << " has non-finite entries";
            throw Error(ErrorKind::validation, os.str());
        }
        const double min_eig = eigh2(elements[i]).values[1];
        if (min_eig < -tol.povm_positivity) {
            std::ostringstream os;
            os << "element " << i << " is not positive semidefinite (eigenvalue " << min_eig << ")";
            throw Error(ErrorKind::validation, os.str());
        }
    }
    const double residual = max_abs(element_sum(elements).matrix() - Matrix2::Identity());
    if (residual > tol.povm_completeness) {
        std::ostringstream os;
        os << "elements do not sum to the identity (residual " << residual << ")";
        throw Error(ErrorKind::validation, os.str());
    }
    return Povm{std::move(elements), std::move(labels)};
}

std::optional<DependenceWitness> find_dependence(const Povm& p, const Tolerances& tol) {
    const auto n = static_cast<Eigen::Index>(p.size());
    Eigen::Matrix<double, 4, Eigen::Dynamic> coords(4, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        coords.col(i) = hermitian_coordinates(p.elements[static_cast<std::size_t>(i)]);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(coords, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const bool dependent = n > 4 || sv(0) == 0.0 || sv(sv.size() - 1) < tol.dependence_ratio * sv(0);
    if (!dependent) {
        return std::nullopt;
    }
    Eigen::VectorXd null = svd.matrixV().col(n - 1);
    Eigen::Index pivot = 0;
    null.cwiseAbs().maxCoeff(&pivot);
    null /= null(pivot);

    DependenceWitness w;
    w.c.assign(null.data(), null.data() + n);
    w.order.resize(p.size());
    std::iota(w.order.begin(), w.order.end(), std::size_t{0});
    std::stable_sort(w.order.begin(), w.order.end(), [&](std::size_t a, std::size_t b) { return w.c[a] > w.c[b]; });
    return w;
}

SplitResult split_once(const Povm& p, const DependenceWitness& w, const Tolerances& tol) {
    const std::size_t n = p.size();
    if (w.c.size() != n || w.order.size() != n || n < 2) {
        throw Error(ErrorKind::validation, "dependence witness does not match the POVM");
    }
    const double residual = max_abs(weighted_sum(p, w.c).matrix());
    if (residual > tol.witness_residual) {
        std::ostringstream os;
        os << "dependence witness is inconsistent with the POVM (|sum c_i E_i| = " << residual << ")";
        throw Error(ErrorKind::validation, os.str());
    }
    const std::size_t first = w.order.front();
    const std::size_t last = w.order.back();
    const double c1 = w.c[first];
    const double cn = w.c[last];
    if (!(c1 > 0.0) || !(cn < 0.0)) {
        throw Error(ErrorKind::validation, "dependence witness needs c_1 > 0 > c_n");
    }

    SplitResult out;
    for (std::size_t j = 0; j < n; ++j) {
        if (j != first) {
            const double scale = (c1 - w.c[j]) / c1;
            if (scale > tol.zero_weight) {
                out.a.elements.push_back(scale * p.elements[j]);
                out.a.labels.push_back(p.labels[j]);
            }
        }
        if (j != last) {
            const double scale = (cn - w.c[j]) / cn;
            if (scale > tol.zero_weight) {
                out.b.elements.push_back(scale * p.elements[j]);
                out.b.labels.push_back(p.labels[j]);
            }
        }
    }
    out.prob_a = c1 / (c1 - cn);
    out.prob_b = -cn / (c1 - cn);
    out.a = validate_povm(std::move(out.a.elements), std::move(out.a.labels), tol);
    out.b = validate_povm(std::move(out.b.elements), std::move(out.b.labels), tol);
    return out;
}

std::vector<LipovmTree::Leaf> LipovmTree::leaves() const {
    std::vector<Leaf> out;
    if (nodes.empty()) {
        return out;
    }
    std::vector<std::pair<int, double>> stack{{0, 1.0}};
    while (!stack.empty()) {
        const auto [index, prob] = stack.back();
        stack.pop_back();
        const Node& node = nodes[static_cast<std::size_t>(index)];
        if (node.leaf) {
            out.push_back(Leaf{index, prob, &*node.leaf});
            continue;
        }
        // b first so a is visited first
        stack.emplace_back(node.child_b, prob * node.prob_b);
        stack.emplace_back(node.child_a, prob * node.prob_a);
    }
    return out;
}

LipovmTree decompose_to_lipovms(const Povm& p, const Tolerances& tol) {
    Povm stripped;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p.elements[i].trace() > 2.0 * tol.zero_weight) {
            stripped.elements.push_back(p.elements[i]);
            stripped.labels.push_back(p.labels[i]);
        }
    }
    LipovmTree tree;
    tree.num_outcomes = p.labels.empty() ? 0 : *std::max_element(p.labels.begin(), p.labels.end()) + 1;
    build_tree(tree, validate_povm(std::move(stripped.elements), std::move(stripped.labels), tol), 0, tol);
    return tree;
}

Povm PpovmPlan::walk_povm() const {
    Povm out;
    for (int k : active) {
        out.elements.push_back(projective[static_cast<std::size_t>(k)]);
        out.labels.push_back(k);
    }
    return out;
}

PpovmPlan to_ppovm(const Povm& p, const Tolerances& tol) {
    const std::size_t n = p.size();
    PpovmPlan plan;
    plan.source = p;
    plan.conditional = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));

    if (n == 1) {
        // A single element is the identity: nothing to measure.
        const EigenPair2 eig = eigh2(p.elements[0]);
        plan.eigen.push_back({eig.values[0], eig.values[1], eig.vectors[0]});
        plan.projective.push_back(p.elements[0]);
        plan.conditional(0, 0) = 1.0;
        plan.active = {0};
        return plan;
    }

    double sum_b = 0.0;
    for (const auto& e : p.elements) {
        const EigenPair2 eig = eigh2(e);
        plan.eigen.push_back({eig.values[0], eig.values[1], eig.vectors[0]});
        sum_b += eig.values[1];
    }
    const double norm = 1.0 - sum_b;
    if (norm <= 1e-12) {
        throw Error(ErrorKind::validation, "all elements proportional to identity; no projective part to measure");
    }
    for (std::size_t k = 0; k < n; ++k) {
        const auto& ed = plan.eigen[k];
        const double weight = (ed.a - ed.b) / norm;
        if (ed.a - ed.b > tol.zero_weight) {
            plan.projective.push_back(weight * HermitianOp::outer(ed.a_vec));
            plan.active.push_back(static_cast<int>(k));
        } else {
            plan.projective.emplace_back();
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            plan.conditional(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                (i == k ? norm : 0.0) + plan.eigen[i].b;
        }
    }
    return plan;
}

void validate_state(const HermitianOp& rho, const Tolerances& tol) {
    const double trace_err = std::abs(rho.trace() - 1.0);
    if (trace_err > tol.state_trace) {
        std::ostringstream os;
        os << "state trace differs from 1 by " << trace_err;
        throw Error(ErrorKind::validation, os.str());
    }
    if (!is_psd(rho, tol.state_trace)) {
        throw Error(ErrorKind::validation, "state is not positive semidefinite");
    }
}

std::vector<double> born_probabilities(const Povm& p, const HermitianOp& rho, const Tolerances& tol) {
    validate_state(rho, tol);
    std::vector<double> out;
    out.reserve(p.size());
    for (const auto& e : p.elements) {
        out.push_back((e.matrix() * rho.matrix()).trace().real());
    }
    return out;
}

std::vector<double> pipeline_probabilities(const LipovmTree& tree, const HermitianOp& rho) {
    std::vector<double> out(static_cast<std::size_t>(tree.num_outcomes), 0.0);
    for (const auto& leaf : tree.leaves()) {
        const PpovmPlan plan = to_ppovm(*leaf.povm);
        const std::size_t n = plan.source.size();
        for (std::size_t k = 0; k < n; ++k) {
            const double pk = (plan.projective[k].matrix() * rho.matrix()).trace().real();
            for (std::size_t i = 0; i < n; ++i) {
                out[static_cast<std::size_t>(plan.source.labels[i])] +=
                    leaf.probability * pk *
                    plan.conditional(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
            }
        }
    }
    return out;
}

namespace fixtures {

namespace {
Povm from_bloch(const std::vector<BlochForm>& forms) {
    std::vector<HermitianOp> elements;
    for (const auto& f : forms) {
        elements.push_back(pauli_compose(f));
    }
    return validate_povm(std::move(elements));
}
}  // namespace

Povm z_measurement() { return from_bloch({{0.5, Vec3(0, 0, 1)}, {0.5, Vec3(0, 0, -1)}}); }

Povm trine() {
    std::vector<BlochForm> forms;
    for (int k = 0; k < 3; ++k) {
        const double angle = 2.0 * M_PI * k / 3.0;
        forms.push_back({1.0 / 3.0, Vec3(std::cos(angle), std::sin(angle), 0.0)});
    }
    return from_bloch(forms);
}

Povm sic() {
    const double s = 1.0 / std::sqrt(3.0);
    return from_bloch({{0.25, Vec3(s, s, s)}, {0.25, Vec3(s, -s, -s)}, {0.25, Vec3(-s, s, -s)}, {0.25, Vec3(-s, -s, s)}});
}

Povm sic_split5() {
    const Povm base = sic();
    return validate_povm({0.3 * base.elements[0], 0.7 * base.elements[0], base.elements[1], base.elements[2],
                          base.elements[3]});
}

}  // namespace fixtures

}  // namespace weakpovm
