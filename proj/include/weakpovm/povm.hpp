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

/**
 * @file
 * Qubit POVMs and the classical pre/post-processing that reduces an arbitrary
 * POVM to linearly independent, rank-one-proportional ones.
 *
 * Pre-processing: a linearly dependent POVM is split into two POVMs with one
 * outcome fewer each, chosen at random with fixed probabilities; repeating
 * this yields a tree whose leaves are linearly independent (at most 4
 * outcomes for a qubit).
 *
 * Post-processing: every element is written as (a_i - b_i)|a_i><a_i| + b_i I.
 * Measuring the projective POVM built from the |a_i><a_i| parts and then
 * relabelling outcome k as i with probability p(i|k) reproduces the original
 * statistics.
 */

#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "weakpovm/qubit_algebra.hpp"
#include "weakpovm/tolerances.hpp"

namespace weakpovm {

/// A validated POVM. labels[j] is the outcome index, in the user's original
/// POVM, that elements[j] reports.
struct Povm {
    std::vector<HermitianOp> elements;
    std::vector<int> labels;

    [[nodiscard]] std::size_t size() const noexcept { return elements.size(); }
};

/// Checks positivity and completeness. Empty labels default to 0..n-1.
/// Throws Error(validation) naming the offending element and property.
Povm validate_povm(std::vector<HermitianOp> elements, std::vector<int> labels = {},
                   const Tolerances& tol = default_tolerances());

/// sum_i c_i E_i = 0 with max |c_i| = 1, the largest-magnitude entry positive.
/// order lists element indices so that c[order[0]] >= c[order[1]] >= ...
/// (stable for ties).
struct DependenceWitness {
    std::vector<double> c;
    std::vector<std::size_t> order;
};

/// Witness iff the elements are linearly dependent as vectors in the real
/// 4-dimensional space of Hermitian 2x2 matrices. Uses the right-singular
/// vector of the smallest singular value.
std::optional<DependenceWitness> find_dependence(const Povm& p, const Tolerances& tol = default_tolerances());

struct SplitResult {
    Povm a;
    double prob_a = 0.0;
    Povm b;
    double prob_b = 0.0;
};

/// One reduction step: A drops the element with the largest coefficient, B the
/// one with the smallest. Elements whose scale factor vanishes are dropped.
SplitResult split_once(const Povm& p, const DependenceWitness& w, const Tolerances& tol = default_tolerances());

/// Tree of random choices; leaves are linearly independent POVMs.
struct LipovmTree {
    struct Node {
        std::optional<Povm> leaf;
        std::optional<DependenceWitness> witness;
        int child_a = -1;
        int child_b = -1;
        double prob_a = 0.0;
        double prob_b = 0.0;
    };
    struct Leaf {
        int node = 0;
        double probability = 1.0;  ///< product of branch probabilities on the path
        const Povm* povm = nullptr;
    };

    std::vector<Node> nodes;  ///< nodes[0] is the root
    int num_outcomes = 0;     ///< outcome count of the POVM that was decomposed

    [[nodiscard]] std::vector<Leaf> leaves() const;
};

/// Zero elements are removed first; each split strictly reduces the outcome
/// count, so recursion deeper than 32 is reported as an internal error.
LipovmTree decompose_to_lipovms(const Povm& p, const Tolerances& tol = default_tolerances());

/// Projective POVM plus the conditional output matrix.
struct PpovmPlan {
    struct EigenData {
        double a = 0.0;  ///< larger eigenvalue
        double b = 0.0;  ///< smaller eigenvalue
        Ket a_vec;       ///< eigenvector of a
    };

    Povm source;
    /// P_k = ((a_k - b_k) / (1 - sum_j b_j)) |a_k><a_k|, possibly the zero matrix.
    std::vector<HermitianOp> projective;
    std::vector<EigenData> eigen;
    /// conditional(i, k) = p(i | k): probability of reporting source element i
    /// after projective outcome k.
    Eigen::MatrixXd conditional;
    /// Indices k with a non-zero projective element, in increasing order. These
    /// are the outcomes the walk actually measures.
    std::vector<int> active;

    /// The non-zero projective elements as a POVM whose labels are indices into
    /// `projective`.
    [[nodiscard]] Povm walk_povm() const;
};

PpovmPlan to_ppovm(const Povm& p, const Tolerances& tol = default_tolerances());

/// Throws Error(validation) unless rho is positive semidefinite with unit trace.
void validate_state(const HermitianOp& rho, const Tolerances& tol = default_tolerances());

/// Tr[E_i rho] for every element.
std::vector<double> born_probabilities(const Povm& p, const HermitianOp& rho,
                                       const Tolerances& tol = default_tolerances());

/// Exact output distribution of the full pre-process / projective / post-process
/// chain, summed over the finite tree. Indexed by original outcome label.
std::vector<double> pipeline_probabilities(const LipovmTree& tree, const HermitianOp& rho);

/// Standard fixtures.
namespace fixtures {
/// {|0><0|, |1><1|}
Povm z_measurement();
/// (2/3)|psi_k><psi_k| with Bloch vectors at 0, 120, 240 degrees in the x-y plane.
Povm trine();
/// (1/4)(I + v_i.sigma) for a regular tetrahedron.
Povm sic();
/// {0.3 E1, 0.7 E1, E2, E3, E4} built from the SIC set.
Povm sic_split5();
}  // namespace fixtures

}  // namespace weakpovm
