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

#include "weakpovm/qubit_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "weakpovm/error.hpp"

namespace weakpovm {

namespace {

constexpr Complex kI{0.0, 1.0};

// Raw Pauli coefficients (bx, by, bz) of a Hermitian matrix.
Vec3 pauli_coefficients(const Matrix2& m) {
    return {m(0, 1).real(), -m(0, 1).imag(), 0.5 * (m(0, 0).real() - m(1, 1).real())};
}

}  // namespace

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::validation: return "validation";
        case ErrorKind::parse: return "parse";
        case ErrorKind::singular: return "singularity";
        case ErrorKind::numerics: return "numerics";
        case ErrorKind::geometry: return "geometry";
        case ErrorKind::constraint: return "constraint";
        case ErrorKind::guard: return "guard";
        case ErrorKind::zero_branch: return "zero-probability-branch";
        case ErrorKind::internal: return "internal";
    }
    return "unknown";
}

HermitianOp HermitianOp::from_matrix(const Matrix2& m, const Tolerances& tol) {
    if (!m.allFinite()) {
        throw Error(ErrorKind::validation, "matrix has non-finite entries");
    }
    const double residual = max_abs(m - m.adjoint());
    if (residual > tol.hermitian) {
        std::ostringstream os;
        os << "matrix is not Hermitian (residual " << residual << " > " << tol.hermitian << ")";
        throw Error(ErrorKind::validation, os.str());
    }
    return hermitian_part(m);
}

HermitianOp HermitianOp::hermitian_part(const Matrix2& m) {
    Matrix2 h = 0.5 * (m + m.adjoint());
    h(0, 0) = h(0, 0).real();
    h(1, 1) = h(1, 1).real();
    return HermitianOp(h);
}

HermitianOp HermitianOp::identity() { return HermitianOp(Matrix2::Identity()); }

HermitianOp HermitianOp::outer(const Ket& psi) { return hermitian_part(psi * psi.adjoint()); }

double HermitianOp::expectation(const Ket& psi) const { return (psi.adjoint() * m_ * psi)(0, 0).real(); }

const Matrix2& sigma_x() {
    static const Matrix2 s = (Matrix2() << 0.0, 1.0, 1.0, 0.0).finished();
    return s;
}

const Matrix2& sigma_y() {
    static const Matrix2 s = (Matrix2() << 0.0, -kI, kI, 0.0).finished();
    return s;
}

const Matrix2& sigma_z() {
    static const Matrix2 s = (Matrix2() << 1.0, 0.0, 0.0, -1.0).finished();
    return s;
}

Matrix2 pauli_dot(const Vec3& v) {
    Matrix2 m;
    m << v.z(), Complex(v.x(), -v.y()), Complex(v.x(), v.y()), -v.z();
    return m;
}

BlochForm pauli_decompose(const HermitianOp& h) {
    const double q = 0.5 * h.trace();
    const Vec3 raw = pauli_coefficients(h.matrix());
    if (q == 0.0) {
        return {0.0, raw};
    }
    return {q, raw / q};
}

HermitianOp pauli_compose(const BlochForm& b) {
    if (b.q == 0.0) {
        return HermitianOp::hermitian_part(pauli_dot(b.v));
    }
    return HermitianOp::hermitian_part(b.q * (Matrix2::Identity() + pauli_dot(b.v)));
}

EigenPair2 eigh2(const HermitianOp& h) {
    const double q = 0.5 * h.trace();
    const Vec3 raw = pauli_coefficients(h.matrix());
    const double norm = raw.norm();

    EigenPair2 out;
    out.values = {q + norm, q - norm};
    const double scale = std::max({1.0, std::abs(q), norm});
    if (norm <= 4.0 * std::numeric_limits<double>::epsilon() * scale) {
        out.values = {q, q};
        out.vectors = {Ket(1.0, 0.0), Ket(0.0, 1.0)};
        return out;
    }
    const Vec3 n = raw / norm;
    Ket plus;
    // Pick the branch whose normalisation stays away from zero.
    if (n.z() >= 0.0) {
        plus << 1.0 + n.z(), Complex(n.x(), n.y());
    } else {
        plus << Complex(n.x(), -n.y()), 1.0 - n.z();
    }
    plus.normalize();
    const Ket minus(-std::conj(plus(1)), std::conj(plus(0)));
    out.vectors = {plus, minus};
    return out;
}

double bloch_b(double r_norm) { return 1.0 / (1.0 + std::sqrt(std::max(0.0, 1.0 - r_norm * r_norm))); }

HermitianOp inv_sqrt_psd(const HermitianOp& e, const Tolerances& tol) {
    const double q = 0.5 * e.trace();
    const Vec3 raw = pauli_coefficients(e.matrix());
    const double lambda_minus = q - raw.norm();
    if (lambda_minus <= tol.singular_eigenvalue) {
        std::ostringstream os;
        os << "inverse square root needs a positive-definite operator; smallest eigenvalue is " << lambda_minus;
        throw Error(ErrorKind::singular, os.str());
    }
    // E = (a/2)(I + r.sigma) with a = Tr E.
    const Vec3 r = raw / q;
    const double rn = std::min(r.norm(), 1.0);
    const double sp = std::sqrt(1.0 + rn);
    const double sm = std::sqrt(1.0 - rn);
    const double prefactor = 0.5 * std::sqrt(1.0 / q) * (sp + sm) / (sp * sm);
    return HermitianOp::hermitian_part(prefactor * (Matrix2::Identity() - bloch_b(rn) * pauli_dot(r)));
}

HermitianOp sqrt_psd(const HermitianOp& e) {
    const EigenPair2 eig = eigh2(e);
    Matrix2 out = Matrix2::Zero();
    for (int i = 0; i < 2; ++i) {
        const auto& v = eig.vectors[static_cast<std::size_t>(i)];
        out += std::sqrt(std::max(0.0, eig.values[static_cast<std::size_t>(i)])) * (v * v.adjoint());
    }
    return HermitianOp::hermitian_part(out);
}

Matrix2 polar_unitary(const Matrix2& m, const Tolerances& tol) {
    const Complex det = m.determinant();
    const double abs_det = std::abs(det);
    if (!(abs_det > tol.singular_det)) {
        std::ostringstream os;
        os << "polar decomposition of a singular matrix (|det| = " << abs_det << ")";
        throw Error(ErrorKind::singular, os.str());
    }
    Matrix2 adj;
    adj << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
    const double trace_p = std::sqrt(m.squaredNorm() + 2.0 * abs_det);
    return (m + (det / abs_det) * adj.adjoint()) / trace_p;
}

bool is_psd(const HermitianOp& h, double tol) { return eigh2(h).values[1] >= -tol; }

Eigen::Matrix3d bloch_rotation(const Matrix2& u) {
    const std::array<const Matrix2*, 3> s{&sigma_x(), &sigma_y(), &sigma_z()};
    Eigen::Matrix3d r;
    for (int j = 0; j < 3; ++j) {
        const Matrix2 rotated = u * (*s[static_cast<std::size_t>(j)]) * u.adjoint();
        const Vec3 col = pauli_coefficients(rotated);
        r.col(j) = col;
    }
    return r;
}

double largest_singular_value(const Matrix2& m) {
    const double f = m.squaredNorm();
    const double d = std::abs(m.determinant());
    return std::sqrt(0.5 * (f + std::sqrt(std::max(0.0, f * f - 4.0 * d * d))));
}

double max_abs(const Matrix2& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace weakpovm
