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
 * Random walk in a simplex realised by destructive weak measurements.
 *
 * The walk performs a linearly independent projective qubit POVM {E_i},
 * 2 <= n <= 4. Its position x lives in the (n-1)-simplex and the accumulated
 * measurement operator M(x) always satisfies M^dag M proportional to
 * sum_i x_i E_i. Each weak step is a weak swap with a fresh |0> ancilla
 * followed by an ancilla measurement {s_k |e_k><e_k|}; the resulting system
 * operators are
 *
 *     M_k = sqrt(s_k) [[<e_k|0> e^{-i phi}, -i <e_k|1> sin(phi)],
 *                      [0,                   <e_k|0> cos(phi)]].
 *
 * plan_step() chooses, for every outcome k, a displacement of the Bloch
 * vector r of sum_i x_i E_i(x) towards the k-th vertex whose length makes the
 * required M_k^dag M_k realisable by the form above, weights c_k that keep the
 * step complete, and the ancilla data (s_k, |e_k>) that realise it.
 */

#pragma once

#include <optional>
#include <vector>

#include <boost/container/static_vector.hpp>
#include <Eigen/Dense>

#include "weakpovm/povm.hpp"
#include "weakpovm/qubit_algebra.hpp"
#include "weakpovm/tolerances.hpp"

namespace weakpovm {

inline constexpr int kMaxWalkOutcomes = 4;

template <class T>
using PerOutcome = boost::container::static_vector<T, kMaxWalkOutcomes>;
using SimplexPoint = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxWalkOutcomes, 1>;
using BlochColumns = Eigen::Matrix<double, 3, Eigen::Dynamic, 0, 3, kMaxWalkOutcomes>;

/// max_steps = 20 * ceil(ln(1/eps) / (2 ln(1/cos phi))).
int default_max_steps(double phi, double epsilon_vertex);

struct WalkConfig {
    double phi = 0.1;              ///< weak-swap angle, radians, in (0, pi/4)
    double epsilon_vertex = 1e-3;  ///< terminate once max_i x_i >= 1 - epsilon_vertex
    int max_steps = 0;             ///< 0 selects default_max_steps(phi, epsilon_vertex)
    bool check_invariants = true;  ///< verify per-step invariants and throw on violation
    Tolerances tol{};

    /// Throws Error(validation) for out-of-range fields.
    void validate() const;
    [[nodiscard]] int resolved_max_steps() const;
};

/// Affine bijection between the simplex and the polytope spanned by the
/// Bloch vectors v_i. Positions are first reweighted by q (x -> x_q), which
/// makes the map to r linear: r = V x_q.
class SimplexMap {
  public:
    /// Checks V q = 0 and rank(V) = n - 1; throws Error(validation) otherwise.
    static SimplexMap build(const SimplexPoint& q, const BlochColumns& v, const Tolerances& tol = default_tolerances());

    /// The same map after the Bloch vectors are rotated by R. Reuses the cached
    /// pseudo-inverse.
    [[nodiscard]] SimplexMap rotated(const Eigen::Matrix3d& rotation) const;

    [[nodiscard]] const SimplexPoint& q() const noexcept { return q_; }
    [[nodiscard]] const BlochColumns& v() const noexcept { return v_; }
    [[nodiscard]] int size() const noexcept { return static_cast<int>(q_.size()); }
    /// Singular values of V, descending.
    [[nodiscard]] Eigen::VectorXd singular_values() const;

  private:
    friend SimplexPoint bloch_to_simplex(const SimplexMap&, const Vec3&, const Tolerances&);

    SimplexPoint q_;
    BlochColumns v_;
    // Left inverse of [V; 1^T] (n x 4).
    Eigen::Matrix<double, Eigen::Dynamic, 4, 0, kMaxWalkOutcomes, 4> left_inverse_;
};

Vec3 simplex_to_bloch(const SimplexMap& map, const SimplexPoint& x);
/// Throws Error(geometry) if r is off the polytope's affine hull or outside it.
SimplexPoint bloch_to_simplex(const SimplexMap& map, const Vec3& r, const Tolerances& tol = default_tolerances());

/// Immutable description of one walk: the projective POVM it performs and the
/// derived constants. Shared read-only by all trajectories.
class WalkModel {
  public:
    /// elements must be a linearly independent POVM of 2..4 rank-one elements.
    WalkModel(Povm lippovm, WalkConfig cfg);

    [[nodiscard]] const Povm& povm() const noexcept { return povm_; }
    [[nodiscard]] const WalkConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] int size() const noexcept { return static_cast<int>(povm_.size()); }
    [[nodiscard]] const std::vector<BlochForm>& forms() const noexcept { return forms_; }
    [[nodiscard]] const SimplexMap& map() const noexcept { return map_; }
    [[nodiscard]] int max_steps() const noexcept { return max_steps_; }

  private:
    Povm povm_;
    WalkConfig cfg_;
    std::vector<BlochForm> forms_;
    SimplexMap map_;
    int max_steps_ = 0;
};

struct WalkState {
    SimplexPoint x;
    Matrix2 accumulated = Matrix2::Identity();  ///< M_{k_t}...M_{k_1}, largest singular value 1
    Matrix2 unitary = Matrix2::Identity();      ///< polar factor of `accumulated`
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();  ///< Bloch image of `unitary`
    Ket system;                                 ///< normalised M(x)|psi_0>
    int steps = 0;
    /// True when `accumulated` is a product of destructive operators (so the
    /// triangular structure invariants apply).
    bool destructive = true;
};

WalkState init_walk(const WalkModel& model, const Ket& psi0);

/// A state with arbitrary interior position x and polar factor `unitary`,
/// accumulated operator unitary * sqrt(sum x_i E_i). Used to probe plan_step
/// away from the trajectories the walk itself produces.
WalkState state_at(const WalkModel& model, const SimplexPoint& x, const Matrix2& unitary, const Ket& psi);

/// Bloch forms of U E_i U^dag.
std::vector<BlochForm> effective_elements(const WalkState& state, const Povm& original);

struct Mixture {
    Vec3 r = Vec3::Zero();
    double b = 0.5;
};
/// Bloch vector of sum_i x_i E_i and the inverse-square-root coefficient b.
/// Throws Error(geometry) when |r| is within tolerance of 1.
Mixture mixture_bloch(const SimplexPoint& x, const std::vector<BlochForm>& elems,
                      const Tolerances& tol = default_tolerances());

/// Bloch length the destructive operator family allows for a positive
/// operator whose Bloch direction has z-component nz:
/// sin^2(phi) / (cos^2(phi) nz + sqrt(sin^2(phi) + cos^2(phi) nz^2)).
double destructive_bloch_length(double nz, double phi);

/// Length |dr| along `direction` at which the step target matches
/// destructive_bloch_length. Exact solution of the (linear-fractional) length
/// equation; always within (0, distance from r to the unit sphere].
double solve_step_length(const Vec3& r, const Vec3& direction, double phi);

/// c [ (1 - r.r_k) I + (b (r.dr) r + (1/b - 1) dr).sigma ], r_k = r + dr.
HermitianOp target_element(const Vec3& r, double b, const Vec3& dr, double c);

struct DestructiveOperator {
    Matrix2 op;        ///< M
    double scale = 0;  ///< s
    Ket ancilla;       ///< |e>, with <e|0> real and >= 0
};
/// Inverts M^dag M = T for the destructive form. Throws Error(constraint) if T
/// violates |T01|^2 = T00 (T11 - T00 cos^2 phi) or needs s > 1.
DestructiveOperator reconstruct_operator(const HermitianOp& target, double phi,
                                         const Tolerances& tol = default_tolerances());

struct OutcomeStep {
    Vec3 direction = Vec3::Zero();
    double length = 0.0;
    double weight = 0.0;  ///< c_k
    SimplexPoint next_x;
    HermitianOp target;   ///< T_k = M_k^dag M_k
    DestructiveOperator measurement;
};

struct StepPlan {
    Vec3 r = Vec3::Zero();
    double b = 0.5;
    PerOutcome<OutcomeStep> outcomes;
};

StepPlan plan_step(const WalkState& state, const WalkModel& model);

/// Applies outcome k. Throws Error(zero_branch) when M_k annihilates the state.
WalkState advance(const WalkState& state, const StepPlan& plan, int outcome, const WalkModel& model);

/// argmax_i x_i once it reaches 1 - epsilon_vertex (ties: lowest index).
std::optional<int> vertex_check(const WalkState& state, const WalkConfig& cfg);

struct StepResiduals {
    double completeness = 0;      ///< |sum_k T_k - I|
    double weight_sum = 0;        ///< |sum c_k - 1/(1-|r|^2)|
    double weight_balance = 0;    ///< |sum c_k dr_k|
    double min_weight = 0;        ///< min c_k
    /// max(normalised Bloch length of T_k - destructive_bloch_length(n_z), 0)
    double bloch_excess = 0;
    double max_bloch_length = 0;  ///< largest normalised Bloch length of any T_k
    double simplex = 0;           ///< max distance of any x_k from the simplex
    double operator_mismatch = 0; ///< max |M_k^dag M_k - T_k|
    double ancilla_completeness = 0;  ///< |sum s_k |e_k><e_k| - I|
};
StepResiduals step_residuals(const StepPlan& plan, double phi);

struct StateResiduals {
    double simplex = 0;          ///< |sum x - 1| and negativity
    double proportionality = 0;  ///< trace-normalised M^dag M vs sum x_i E_i
    double lower_left = 0;       ///< |accumulated(1,0)|
    double diagonal_ratio = 0;   ///< diagonal_ratio_residual()
};
StateResiduals state_residuals(const WalkState& state, const WalkModel& model);

/// | |acc11 / acc00| - cos^steps phi |. A step whose ancilla vector is exactly
/// |1> zeroes both diagonal entries; that case counts as 0.
double diagonal_ratio_residual(const Matrix2& accumulated, double phi, int steps);

}  // namespace weakpovm
