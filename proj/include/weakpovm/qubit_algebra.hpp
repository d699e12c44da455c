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
 * Closed-form 2x2 complex linear algebra for single-qubit operators.
 *
 * Everything here works on fixed-size Eigen types and never allocates, so it
 * can sit on the inner loop of the trajectory simulator.
 */

#pragma once

#include <array>
#include <complex>

#include <Eigen/Dense>

#include "weakpovm/tolerances.hpp"

namespace weakpovm {

using Complex = std::complex<double>;
using Matrix2 = Eigen::Matrix2cd;
using Ket = Eigen::Vector2cd;
using Vec3 = Eigen::Vector3d;

/// 2x2 complex Hermitian matrix. Construction through from_matrix() checks the
/// Hermiticity residual and stores the exact Hermitian part.
class HermitianOp {
  public:
    HermitianOp() : m_(Matrix2::Zero()) {}

    static HermitianOp from_matrix(const Matrix2& m, const Tolerances& tol = default_tolerances());
    /// Hermitian part (m + m^dag)/2, no residual check.
    static HermitianOp hermitian_part(const Matrix2& m);
    static HermitianOp identity();
    /// |psi><psi| for the given (not necessarily normalised) ket.
    static HermitianOp outer(const Ket& psi);

    [[nodiscard]] const Matrix2& matrix() const noexcept { return m_; }
    [[nodiscard]] Complex operator()(int i, int j) const { return m_(i, j); }
    [[nodiscard]] double trace() const noexcept { return m_(0, 0).real() + m_(1, 1).real(); }
    /// <psi|H|psi>
    [[nodiscard]] double expectation(const Ket& psi) const;

    HermitianOp& operator+=(const HermitianOp& o) {
        m_ += o.m_;
        return *this;
    }
    HermitianOp& operator-=(const HermitianOp& o) {
        m_ -= o.m_;
        return *this;
    }
    HermitianOp& operator*=(double s) {
        m_ *= s;
        return *this;
    }
    friend HermitianOp operator+(HermitianOp a, const HermitianOp& b) { return a += b; }
    friend HermitianOp operator-(HermitianOp a, const HermitianOp& b) { return a -= b; }
    friend HermitianOp operator*(double s, HermitianOp a) { return a *= s; }
    friend HermitianOp operator*(HermitianOp a, double s) { return a *= s; }

  private:
    explicit HermitianOp(const Matrix2& m) : m_(m) {}
    Matrix2 m_;
};

/// H = q (I + v.sigma). For a traceless H, q = 0 and v holds the raw Pauli
/// coefficients instead.
struct BlochForm {
    double q = 0.0;
    Vec3 v = Vec3::Zero();
};

/// Eigenvalues in descending order with matching orthonormal eigenvectors.
struct EigenPair2 {
    std::array<double, 2> values{};
    std::array<Ket, 2> vectors{};
};

const Matrix2& sigma_x();
const Matrix2& sigma_y();
const Matrix2& sigma_z();

/// v.sigma
Matrix2 pauli_dot(const Vec3& v);

BlochForm pauli_decompose(const HermitianOp& h);
HermitianOp pauli_compose(const BlochForm& b);

/// Closed-form Hermitian eigendecomposition. A degenerate spectrum returns the
/// computational basis.
EigenPair2 eigh2(const HermitianOp& h);

/// Coefficient b with (I + r.sigma)^{-1/2} proportional to (I - b r.sigma).
/// Evaluated as 1/(1 + sqrt(1 - |r|^2)), which equals (1 - sqrt(1-|r|^2))/|r|^2
/// without the 0/0 at r = 0.
double bloch_b(double r_norm);

/// E^{-1/2} for a positive-definite E, through the Pauli closed form.
/// Throws Error(singular) naming the smallest eigenvalue when it is <= tol.
HermitianOp inv_sqrt_psd(const HermitianOp& e, const Tolerances& tol = default_tolerances());

/// E^{1/2} for a positive-semidefinite E (negative eigenvalues clamp to zero).
HermitianOp sqrt_psd(const HermitianOp& e);

/// Unitary factor U of the polar decomposition M = U P with P > 0.
/// Uses U = (M + e^{i arg det M} adj(M)^dag) / (p1 + p2), exact for 2x2.
Matrix2 polar_unitary(const Matrix2& m, const Tolerances& tol = default_tolerances());

bool is_psd(const HermitianOp& h, double tol);

/// SO(3) rotation R with U (v.sigma) U^dag = (R v).sigma.
Eigen::Matrix3d bloch_rotation(const Matrix2& u);

double largest_singular_value(const Matrix2& m);
double max_abs(const Matrix2& m);

}  // namespace weakpovm
