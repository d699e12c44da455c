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

#include "weakpovm/simplex_walk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "weakpovm/error.hpp"

namespace weakpovm {

namespace {

constexpr Complex kI{0.0, 1.0};

using WeightSystem = Eigen::Matrix<double, 4, Eigen::Dynamic, 0, 4, kMaxWalkOutcomes>;

SimplexPoint reweight(const SimplexPoint& x, const SimplexPoint& q) {
    SimplexPoint xq = x.cwiseProduct(q);
    return xq / xq.sum();
}

[[noreturn]] void fail(ErrorKind kind, const std::string& what, double value) {
    std::ostringstream os;
    os << what << " (" << value << ")";
    throw Error(kind, os.str());
}

}  // namespace

int default_max_steps(double phi, double epsilon_vertex) {
    const double rate = 2.0 * std::log(1.0 / std::cos(phi));
    return 20 * static_cast<int>(std::ceil(std::log(1.0 / epsilon_vertex) / rate));
}

void WalkConfig::validate() const {
    if (!(phi > 0.0 && phi < M_PI / 4.0)) {
        fail(ErrorKind::validation, "phi must lie in (0, pi/4)", phi);
    }
    if (!(epsilon_vertex > 0.0 && epsilon_vertex < 0.1)) {
        fail(ErrorKind::validation, "epsilon_vertex must lie in (0, 0.1)", epsilon_vertex);
    }
    if (max_steps < 0) {
        fail(ErrorKind::validation, "max_steps must be positive (0 selects the default)", max_steps);
    }
}

int WalkConfig::resolved_max_steps() const {
    return max_steps > 0 ? max_steps : default_max_steps(phi, epsilon_vertex);
}

// ---------------------------------------------------------------------------
// SimplexMap

SimplexMap SimplexMap::build(const SimplexPoint& q, const BlochColumns& v, const Tolerances& tol) {
    const auto n = q.size();
    if (n < 2 || n > kMaxWalkOutcomes || v.cols() != n) {
        throw Error(ErrorKind::validation, "simplex map needs 2..4 matching weights and Bloch vectors");
    }
    if ((q.array() <= 0.0).any() || std::abs(q.sum() - 1.0) > tol.simplex) {
        throw Error(ErrorKind::validation, "simplex map weights must be positive and sum to 1");
    }
    const double kernel = (v * q).norm();
    if (kernel > tol.polytope) {
        fail(ErrorKind::validation, "weighted Bloch vectors do not sum to zero", kernel);
    }
    SimplexMap map;
    map.q_ = q;
    map.v_ = v;
    const Eigen::VectorXd sv = map.singular_values();
    const auto rank = (sv.array() > tol.dependence_ratio * sv(0)).count();
    if (rank != n - 1) {
        std::ostringstream os;
        os << "Bloch matrix has rank " << rank << ", expected " << n - 1 << " (elements linearly dependent)";
        throw Error(ErrorKind::validation, os.str());
    }
    Eigen::MatrixXd augmented(4, n);
    augmented.topRows(3) = v;
    augmented.row(3).setOnes();
    map.left_inverse_ = augmented.completeOrthogonalDecomposition().pseudoInverse();
    return map;
}

SimplexMap SimplexMap::rotated(const Eigen::Matrix3d& rotation) const {
    SimplexMap out = *this;
    out.v_ = rotation * v_;
    Eigen::Matrix4d back = Eigen::Matrix4d::Identity();
    back.topLeftCorner<3, 3>() = rotation.transpose();
    out.left_inverse_ = left_inverse_ * back;
    return out;
}

Eigen::VectorXd SimplexMap::singular_values() const {
    Eigen::MatrixXd dense = v_;
    return Eigen::JacobiSVD<Eigen::MatrixXd>(dense).singularValues();
}

Vec3 simplex_to_bloch(const SimplexMap& map, const SimplexPoint& x) { return map.v() * reweight(x, map.q()); }

SimplexPoint bloch_to_simplex(const SimplexMap& map, const Vec3& r, const Tolerances& tol) {
    Eigen::Vector4d rhs;
    rhs << r, 1.0;
    const SimplexPoint xq = map.left_inverse_ * rhs;
    const double off_hull = (map.v() * xq - r).norm();
    if (off_hull > tol.polytope) {
        fail(ErrorKind::geometry, "Bloch vector lies off the image polytope's affine hull", off_hull);
    }
    const double most_negative = xq.minCoeff();
    if (most_negative < -tol.simplex) {
        fail(ErrorKind::geometry, "Bloch vector lies outside the image polytope (barycentric coordinate)",
             most_negative);
    }
    SimplexPoint x = xq.cwiseMax(0.0).cwiseQuotient(map.q());
    return x / x.sum();
}

// ---------------------------------------------------------------------------
// WalkModel and state

WalkModel::WalkModel(Povm lippovm, WalkConfig cfg) : povm_(std::move(lippovm)), cfg_(std::move(cfg)) {
    cfg_.validate();
    const auto n = static_cast<int>(povm_.size());
    if (n < 2 || n > kMaxWalkOutcomes) {
        std::ostringstream os;
        os << "the walk performs 2..4 outcome POVMs, got " << n << " (decompose first)";
        throw Error(ErrorKind::validation, os.str());
    }
    SimplexPoint q(n);
    BlochColumns v(3, n);
    for (int i = 0; i < n; ++i) {
        const BlochForm f = pauli_decompose(povm_.elements[static_cast<std::size_t>(i)]);
        if (!(f.q > 0.0) || std::abs(f.v.norm() - 1.0) > 1e-9) {
            std::ostringstream os;
            os << "walk element " << i << " is not proportional to a rank-one projector";
            throw Error(ErrorKind::validation, os.str());
        }
        forms_.push_back(f);
        q(i) = f.q;
        v.col(i) = f.v;
    }
    map_ = SimplexMap::build(q, v, cfg_.tol);
    max_steps_ = cfg_.resolved_max_steps();
}

WalkState init_walk(const WalkModel& model, const Ket& psi0) {
    if (std::abs(psi0.norm() - 1.0) > 1e-10) {
        fail(ErrorKind::validation, "initial state must be normalised; norm is", psi0.norm());
    }
    WalkState s;
    s.x = SimplexPoint::Constant(model.size(), 1.0 / model.size());
    s.system = psi0;
    return s;
}

WalkState state_at(const WalkModel& model, const SimplexPoint& x, const Matrix2& unitary, const Ket& psi) {
    HermitianOp mix;
    for (int i = 0; i < model.size(); ++i) {
        mix += x(i) * model.povm().elements[static_cast<std::size_t>(i)];
    }
    WalkState s;
    s.x = x;
    s.unitary = unitary;
    s.rotation = bloch_rotation(unitary);
    s.accumulated = unitary * sqrt_psd(mix).matrix();
    s.accumulated /= largest_singular_value(s.accumulated);
    s.system = psi.normalized();
    s.destructive = false;
    return s;
}

std::vector<BlochForm> effective_elements(const WalkState& state, const Povm& original) {
    std::vector<BlochForm> out;
    out.reserve(original.size());
    for (const auto& e : original.elements) {
        out.push_back(pauli_decompose(HermitianOp::hermitian_part(state.unitary * e.matrix() * state.unitary.adjoint())));
    }
    return out;
}

Mixture mixture_bloch(const SimplexPoint& x, const std::vector<BlochForm>& elems, const Tolerances& tol) {
    double total = 0.0;
    Vec3 acc = Vec3::Zero();
    for (std::size_t i = 0; i < elems.size(); ++i) {
        const double w = x(static_cast<Eigen::Index>(i)) * elems[i].q;
        total += w;
        acc += w * elems[i].v;
    }
    Mixture m;
    m.r = acc / total;
    const double rn = m.r.norm();
    if (rn >= 1.0 - tol.degenerate_bloch) {
        fail(ErrorKind::geometry, "mixture Bloch vector reached the sphere; the walk is at a vertex", rn);
    }
    m.b = bloch_b(rn);
    return m;
}

// ---------------------------------------------------------------------------
// Single-step construction

double destructive_bloch_length(double nz, double phi) {
    const double s2 = std::sin(phi) * std::sin(phi);
    const double c2 = std::cos(phi) * std::cos(phi);
    const double root = std::sqrt(s2 + c2 * nz * nz);
    // Two algebraically equal forms; each avoids cancellation on its side.
    if (nz >= 0.0) {
        return s2 / (c2 * nz + root);
    }
    return (root - c2 * nz) / (1.0 + c2 * nz * nz);
}

double solve_step_length(const Vec3& r, const Vec3& direction, double phi) {
    const double r2 = r.squaredNorm();
    const double b = bloch_b(std::sqrt(r2));
    const double along = r.dot(direction);
    // Bloch vector of the step target per unit length: b (r.u) r + (1/b - 1) u.
    const Vec3 w = b * along * r + (1.0 / b - 1.0) * direction;
    const double w_norm = w.norm();
    const double target = destructive_bloch_length(w.z() / w_norm, phi);
    // Bloch length of the target is w_norm * l / (1 - |r|^2 - (r.u) l).
    const double length = target * (1.0 - r2) / (w_norm + target * along);
    const double to_sphere = -along + std::sqrt(along * along + 1.0 - r2);
    if (!(length > 0.0) || length > to_sphere * (1.0 + 1e-12)) {
        fail(ErrorKind::internal, "step length outside (0, distance to vertex]", length);
    }
    return std::min(length, to_sphere);
}

HermitianOp target_element(const Vec3& r, double b, const Vec3& dr, double c) {
    const Vec3 rk = r + dr;
    const double scalar = 1.0 - r.dot(rk);
    const Vec3 vec = b * r.dot(dr) * r + (1.0 / b - 1.0) * dr;
    return HermitianOp::hermitian_part(c * (scalar * Matrix2::Identity() + pauli_dot(vec)));
}

DestructiveOperator reconstruct_operator(const HermitianOp& target, double phi, const Tolerances& tol) {
    const double sin_phi = std::sin(phi);
    const double cos2 = std::cos(phi) * std::cos(phi);
    const double t00 = target(0, 0).real();
    const double t11 = target(1, 1).real();
    const Complex t01 = target(0, 1);

    const double tail = t11 - t00 * cos2;
    const double mismatch = std::norm(t01) - t00 * tail;
    if (std::abs(mismatch) > tol.operator_consistency) {
        fail(ErrorKind::constraint, "target violates |T01|^2 = T00 (T11 - T00 cos^2 phi); residual", mismatch);
    }
    const double s = t00 + tail / (sin_phi * sin_phi);
    if (!(s > 0.0)) {
        fail(ErrorKind::constraint, "target operator is zero or negative; ancilla weight", s);
    }
    if (s > 1.0 + 1e-10) {
        fail(ErrorKind::constraint, "ancilla weight exceeds 1", s);
    }
    // gamma* delta = i e^{-i phi} T01 / (s sin phi) with gamma real. The larger
    // of |gamma|, |delta| comes from a square root and the other from this
    // linear relation; sqrt(1 - gamma^2) would lose half the digits near e = |0>.
    const Complex product = kI * std::polar(1.0, -phi) * t01 / (s * sin_phi);
    const double gamma2 = std::clamp(t00 / s, 0.0, 1.0);
    double gamma = 0.0;
    Complex delta;
    if (gamma2 >= 0.5) {
        gamma = std::sqrt(gamma2);
        delta = product / gamma;
    } else {
        const double delta_abs = std::sqrt(std::clamp(tail / (s * sin_phi * sin_phi), 0.0, 1.0));
        delta = std::abs(product) > 0.0 ? delta_abs * product / std::abs(product) : Complex(delta_abs, 0.0);
        gamma = std::abs(product) / delta_abs;
    }

    DestructiveOperator out;
    out.scale = s;
    const double root_s = std::sqrt(s);
    out.op << root_s * gamma * std::polar(1.0, -phi), -kI * root_s * delta * sin_phi, 0.0,
        root_s * gamma * std::cos(phi);
    out.ancilla << gamma, std::conj(delta);
    return out;
}

StepPlan plan_step(const WalkState& state, const WalkModel& model) {
    const WalkConfig& cfg = model.config();
    const int n = model.size();
    const SimplexMap frame = model.map().rotated(state.rotation);

    StepPlan plan;
    {
        const SimplexPoint w = state.x.cwiseProduct(frame.q());
        plan.r = frame.v() * w / w.sum();
    }
    const double rn = plan.r.norm();
    if (rn >= 1.0 - cfg.tol.degenerate_bloch) {
        fail(ErrorKind::geometry, "mixture Bloch vector reached the sphere; the walk is at a vertex", rn);
    }
    plan.b = bloch_b(rn);
    const double one_minus_r2 = 1.0 - plan.r.squaredNorm();

    WeightSystem system(4, n);
    for (int k = 0; k < n; ++k) {
        OutcomeStep step;
        const Vec3 to_vertex = frame.v().col(k) - plan.r;
        const double distance = to_vertex.norm();
        if (!(distance > 0.0)) {
            throw Error(ErrorKind::geometry, "walk position coincides with a vertex");
        }
        step.direction = to_vertex / distance;
        step.length = solve_step_length(plan.r, step.direction, cfg.phi);
        system.col(k) << step.length * step.direction, 1.0;
        plan.outcomes.push_back(std::move(step));
    }

    // Weights: sum_k c_k dr_k = 0 within the (n-1)-dimensional span of the
    // steps, sum_k c_k = 1 / (1 - |r|^2). The stacked system is consistent and
    // has full column rank, so its least-squares solution is exact.
    Eigen::Vector4d rhs(0.0, 0.0, 0.0, 1.0 / one_minus_r2);
    const auto qr = system.colPivHouseholderQr();
    SimplexPoint weights = qr.solve(rhs);
    // One round of iterative refinement keeps sum_k T_k = I at rounding level
    // even where the steps are nearly parallel.
    weights += qr.solve(rhs - system * weights);
    for (int k = 0; k < n; ++k) {
        if (!(weights(k) > 0.0)) {
            std::ostringstream os;
            os << "step weight c_" << k << " = " << weights(k) << " is not positive at x = " << state.x.transpose()
               << ", r = " << plan.r.transpose();
            throw Error(ErrorKind::geometry, os.str());
        }
    }

    for (int k = 0; k < n; ++k) {
        auto& step = plan.outcomes[static_cast<std::size_t>(k)];
        step.weight = weights(k);
        const Vec3 dr = step.length * step.direction;
        step.target = target_element(plan.r, plan.b, dr, step.weight);
        step.next_x = bloch_to_simplex(frame, plan.r + dr, cfg.tol);
        step.measurement = reconstruct_operator(step.target, cfg.phi, cfg.tol);
    }

    if (cfg.check_invariants) {
        HermitianOp total;
        for (const auto& step : plan.outcomes) {
            total += step.target;
        }
        const double completeness = max_abs(total.matrix() - Matrix2::Identity());
        if (completeness > cfg.tol.step_completeness) {
            fail(ErrorKind::numerics, "planned step is not complete; |sum T_k - I|", completeness);
        }
    }
    return plan;
}

WalkState advance(const WalkState& state, const StepPlan& plan, int outcome, const WalkModel& model) {
    const WalkConfig& cfg = model.config();
    if (outcome < 0 || outcome >= static_cast<int>(plan.outcomes.size())) {
        fail(ErrorKind::validation, "outcome index out of range", outcome);
    }
    const OutcomeStep& step = plan.outcomes[static_cast<std::size_t>(outcome)];
    WalkState next = state;

    const Ket psi = step.measurement.op * state.system;
    const double psi_norm = psi.norm();
    if (psi_norm < cfg.tol.zero_branch) {
        fail(ErrorKind::zero_branch, "outcome has zero probability for the current state; |M_k psi|", psi_norm);
    }
    next.system = psi / psi_norm;

    next.accumulated = step.measurement.op * state.accumulated;
    next.accumulated /= largest_singular_value(next.accumulated);
    next.x = step.next_x;
    next.steps = state.steps + 1;

    try {
        next.unitary = polar_unitary(next.accumulated, cfg.tol);
        next.rotation = bloch_rotation(next.unitary);
    } catch (const Error& e) {
        // A rank-one accumulated operator only arises when the step landed
        // exactly on a vertex; the frame is irrelevant from there on.
        if (e.kind() != ErrorKind::singular || !vertex_check(next, cfg)) {
            throw;
        }
    }

    if (cfg.check_invariants) {
        const StateResiduals res = state_residuals(next, model);
        if (res.simplex > cfg.tol.simplex) {
            fail(ErrorKind::numerics, "walk position left the simplex", res.simplex);
        }
        if (res.proportionality > cfg.tol.proportionality) {
            fail(ErrorKind::numerics, "accumulated operator lost proportionality to sum x_i E_i", res.proportionality);
        }
        if (next.destructive && (res.lower_left != 0.0 || res.diagonal_ratio > 1e-9)) {
            fail(ErrorKind::numerics, "accumulated operator lost its destructive triangular structure",
                 std::max(res.lower_left, res.diagonal_ratio));
        }
    }
    return next;
}

std::optional<int> vertex_check(const WalkState& state, const WalkConfig& cfg) {
    Eigen::Index best = 0;
    const double top = state.x.maxCoeff(&best);
    if (top >= 1.0 - cfg.epsilon_vertex) {
        return static_cast<int>(best);
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Diagnostics

StepResiduals step_residuals(const StepPlan& plan, double phi) {
    StepResiduals res;
    HermitianOp total;
    Matrix2 ancilla = Matrix2::Zero();
    Vec3 balance = Vec3::Zero();
    double weight_sum = 0.0;
    res.min_weight = std::numeric_limits<double>::infinity();
    for (const auto& step : plan.outcomes) {
        total += step.target;
        weight_sum += step.weight;
        balance += step.weight * step.length * step.direction;
        res.min_weight = std::min(res.min_weight, step.weight);

        const BlochForm bf = pauli_decompose(step.target);
        const double length = bf.v.norm();
        res.max_bloch_length = std::max(res.max_bloch_length, length);
        const double nz = length > 0.0 ? bf.v.z() / length : 0.0;
        res.bloch_excess = std::max(res.bloch_excess, length - destructive_bloch_length(nz, phi));

        const double sum = step.next_x.sum();
        res.simplex = std::max({res.simplex, std::abs(sum - 1.0), -step.next_x.minCoeff()});

        const Matrix2& m = step.measurement.op;
        res.operator_mismatch = std::max(res.operator_mismatch, max_abs(m.adjoint() * m - step.target.matrix()));
        ancilla += step.measurement.scale * step.measurement.ancilla * step.measurement.ancilla.adjoint();
    }
    res.bloch_excess = std::max(res.bloch_excess, 0.0);
    res.completeness = max_abs(total.matrix() - Matrix2::Identity());
    res.weight_sum = std::abs(weight_sum - 1.0 / (1.0 - plan.r.squaredNorm()));
    res.weight_balance = balance.norm();
    res.ancilla_completeness = max_abs(ancilla - Matrix2::Identity());
    return res;
}

StateResiduals state_residuals(const WalkState& state, const WalkModel& model) {
    StateResiduals res;
    res.simplex = std::max(std::abs(state.x.sum() - 1.0), std::max(0.0, -state.x.minCoeff()));

    HermitianOp mix;
    for (int i = 0; i < model.size(); ++i) {
        mix += state.x(i) * model.povm().elements[static_cast<std::size_t>(i)];
    }
    const Matrix2 gram = state.accumulated.adjoint() * state.accumulated;
    res.proportionality = max_abs(gram / gram.trace().real() - mix.matrix() / mix.trace());

    res.lower_left = std::abs(state.accumulated(1, 0));
    if (state.destructive) {
        res.diagonal_ratio = diagonal_ratio_residual(state.accumulated, model.config().phi, state.steps);
    }
    return res;
}

double diagonal_ratio_residual(const Matrix2& accumulated, double phi, int steps) {
    const double a00 = std::abs(accumulated(0, 0));
    const double a11 = std::abs(accumulated(1, 1));
    if (a00 == 0.0) {
        return a11 == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return std::abs(a11 / a00 - std::pow(std::cos(phi), steps));
}

}  // namespace weakpovm
