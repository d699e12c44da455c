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

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "weakpovm/error.hpp"

using namespace weakpovm;
using namespace weakpovm::testing;

namespace {

HermitianOp herm(const Matrix2& m) { return HermitianOp::from_matrix(m); }

Matrix2 diag(double a, double b) {
    Matrix2 m = Matrix2::Zero();
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::internal;
}

}  // namespace

TEST(HermitianOp, rejects_non_hermitian) {
    Matrix2 m = Matrix2::Zero();
    m(0, 1) = 1.0;
    EXPECT_EQ(kind_of([&] { herm(m); }), ErrorKind::validation);
    m(1, 0) = 1.0 + 1e-13;
    EXPECT_NO_THROW(herm(m));
}

TEST(PauliDecompose, examples) {
    BlochForm f = pauli_decompose(HermitianOp::identity());
    EXPECT_DOUBLE_EQ(f.q, 1.0);
    EXPECT_LT(f.v.norm(), 1e-15);

    f = pauli_decompose(herm(diag(1, 0)));
    EXPECT_DOUBLE_EQ(f.q, 0.5);
    EXPECT_LT((f.v - Vec3(0, 0, 1)).norm(), 1e-15);

    f = pauli_decompose(herm(0.25 * (Matrix2::Identity() + sigma_x())));
    EXPECT_DOUBLE_EQ(f.q, 0.25);
    EXPECT_LT((f.v - Vec3(1, 0, 0)).norm(), 1e-15);
}

TEST(PauliDecompose, traceless_returns_raw_coefficients) {
    const BlochForm f = pauli_decompose(herm(0.3 * sigma_y() - 0.2 * sigma_z()));
    EXPECT_EQ(f.q, 0.0);
    EXPECT_LT((f.v - Vec3(0, 0.3, -0.2)).norm(), 1e-15);
    EXPECT_LT(max_abs(pauli_compose(f).matrix() - (0.3 * sigma_y() - 0.2 * sigma_z())), 1e-15);
}

TEST(PauliCompose, examples) {
    EXPECT_LT(max_abs(pauli_compose({1.0, Vec3::Zero()}).matrix() - Matrix2::Identity()), 1e-15);
    EXPECT_LT(max_abs(pauli_compose({0.5, Vec3(0, 0, -1)}).matrix() - diag(0, 1)), 1e-15);
}

TEST(PauliCompose, random_roundtrip) {
    TestRng rng(11);
    for (int t = 0; t < 100; ++t) {
        const HermitianOp h = herm(random_hermitian_matrix(rng));
        EXPECT_LT(max_abs(pauli_compose(pauli_decompose(h)).matrix() - h.matrix()), 1e-12);
    }
}

TEST(PauliDecompose, psd_bloch_length_at_most_one) {
    TestRng rng(12);
    for (int t = 0; t < 100; ++t) {
        const BlochForm f = pauli_decompose(herm(random_positive_definite(rng)));
        EXPECT_GT(f.q, 0.0);
        EXPECT_LE(f.v.norm(), 1.0 + 1e-10);
    }
}

TEST(Eigh2, examples) {
    EigenPair2 e = eigh2(herm(diag(4, 1)));
    EXPECT_DOUBLE_EQ(e.values[0], 4.0);
    EXPECT_DOUBLE_EQ(e.values[1], 1.0);
    EXPECT_NEAR(std::abs(e.vectors[0](0)), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(e.vectors[1](1)), 1.0, 1e-15);

    e = eigh2(herm(Matrix2::Identity() + 0.6 * sigma_z()));
    EXPECT_NEAR(e.values[0], 1.6, 1e-15);
    EXPECT_NEAR(e.values[1], 0.4, 1e-15);

    e = eigh2(HermitianOp::identity());
    EXPECT_EQ(e.values[0], 1.0);
    EXPECT_EQ(e.values[1], 1.0);
    EXPECT_NEAR(std::abs(e.vectors[0].dot(e.vectors[1])), 0.0, 1e-15);
}

TEST(Eigh2, reconstruction_and_closed_form_property) {
    TestRng rng(13);
    for (int t = 0; t < 200; ++t) {
        Matrix2 m = random_hermitian_matrix(rng);
        if (t % 10 == 0) {
            m = rng.normal() * Matrix2::Identity();  // degenerate
        }
        const HermitianOp h = herm(m);
        const EigenPair2 e = eigh2(h);
        EXPECT_GE(e.values[0], e.values[1]);
        const Matrix2 rebuilt = e.values[0] * e.vectors[0] * e.vectors[0].adjoint() +
                                e.values[1] * e.vectors[1] * e.vectors[1].adjoint();
        EXPECT_LT(max_abs(rebuilt - h.matrix()), 1e-11);
        EXPECT_NEAR(std::abs(e.vectors[0].dot(e.vectors[1])), 0.0, 1e-12);
        EXPECT_NEAR(e.vectors[0].norm(), 1.0, 1e-12);
        EXPECT_NEAR(e.vectors[1].norm(), 1.0, 1e-12);

        const BlochForm f = pauli_decompose(h);
        if (f.q > 0) {
            EXPECT_NEAR(e.values[0], f.q * (1 + f.v.norm()), 1e-11);
            EXPECT_NEAR(e.values[1], f.q * (1 - f.v.norm()), 1e-11);
        }
    }
}

TEST(BlochB, matches_textbook_form_and_series) {
    EXPECT_DOUBLE_EQ(bloch_b(0.0), 0.5);
    EXPECT_NEAR(bloch_b(0.6), 5.0 / 9.0, 1e-15);
    for (double r : {1e-9, 1e-7, 1e-5}) {
        EXPECT_NEAR(bloch_b(r), 0.5 + r * r / 8.0, 1e-15);
    }
    for (double r = 0.01; r < 0.999; r += 0.01) {
        EXPECT_NEAR(bloch_b(r), (1 - std::sqrt(1 - r * r)) / (r * r), 1e-12);
    }
}

TEST(InvSqrtPsd, examples) {
    EXPECT_LT(max_abs(inv_sqrt_psd(HermitianOp::identity()).matrix() - Matrix2::Identity()), 1e-15);
    EXPECT_LT(max_abs(inv_sqrt_psd(herm(diag(4, 1))).matrix() - diag(0.5, 1)), 1e-15);
    const Matrix2 e = Matrix2::Identity() + 0.6 * sigma_z();
    EXPECT_LT(max_abs(inv_sqrt_psd(herm(e)).matrix() - diag(1 / std::sqrt(1.6), 1 / std::sqrt(0.4))), 1e-12);
    // (I + 0.6 sz)^{-1/2} is proportional to I - (5/9)(0.6) sz.
    const Matrix2 r = inv_sqrt_psd(herm(e)).matrix();
    const Matrix2 shape = Matrix2::Identity() - (5.0 / 9.0) * 0.6 * sigma_z();
    EXPECT_LT(max_abs(r / r(0, 0) - shape / shape(0, 0)), 1e-12);
}

TEST(InvSqrtPsd, singular_input_names_eigenvalue) {
    try {
        inv_sqrt_psd(herm(diag(1, 0)));
        FAIL() << "expected a singular error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::singular);
        EXPECT_NE(std::string(e.what()).find("eigenvalue"), std::string::npos);
    }
}

TEST(InvSqrtPsd, agrees_with_eigensolver) {
    TestRng rng(14);
    for (int t = 0; t < 300; ++t) {
        const Matrix2 a = random_positive_definite(rng);
        const Matrix2 r = inv_sqrt_psd(herm(a)).matrix();
        EXPECT_LT(max_abs(r - eigen_inv_sqrt(a)), 1e-10);
        EXPECT_LT(max_abs(r * a * r - Matrix2::Identity()), 1e-10);
        EXPECT_LT(max_abs(r * a - a * r), 1e-10);
        EXPECT_LT(max_abs(r * r - a.inverse()), 1e-10);
    }
}

TEST(PolarUnitary, examples) {
    TestRng rng(15);
    const Matrix2 u0 = random_unitary(rng);
    EXPECT_LT(max_abs(polar_unitary(u0) - u0), 1e-12);
    EXPECT_LT(max_abs(polar_unitary(diag(2, 3)) - Matrix2::Identity()), 1e-15);
    EXPECT_EQ(kind_of([] { polar_unitary(diag(1, 0)); }), ErrorKind::singular);
}

TEST(PolarUnitary, random_factorisation) {
    TestRng rng(16);
    for (int t = 0; t < 300; ++t) {
        const Matrix2 m = random_complex_matrix(rng);
        const Matrix2 u = polar_unitary(m);
        EXPECT_LT(max_abs(u.adjoint() * u - Matrix2::Identity()), 1e-11);
        const Matrix2 p = u.adjoint() * m;
        EXPECT_LT(max_abs(p - p.adjoint()), 1e-10);
        Eigen::SelfAdjointEigenSolver<Matrix2> es(0.5 * (p + p.adjoint()));
        EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
    }
}

TEST(IsPsd, examples) {
    EXPECT_TRUE(is_psd(herm(diag(1, 0)), 0.0));
    EXPECT_FALSE(is_psd(herm(sigma_z()), 1e-10));
    EXPECT_TRUE(is_psd(herm(Matrix2::Identity() - (1 + 2e-9) * diag(0, 1)), 1e-8));
}

TEST(BlochRotation, conjugation_matches_rotation) {
    TestRng rng(17);
    for (int t = 0; t < 100; ++t) {
        const Matrix2 u = random_unitary(rng);
        const Eigen::Matrix3d r = bloch_rotation(u);
        EXPECT_LT((r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_NEAR(r.determinant(), 1.0, 1e-12);
        const Vec3 v(rng.normal(), rng.normal(), rng.normal());
        EXPECT_LT(max_abs(u * pauli_dot(v) * u.adjoint() - pauli_dot(r * v)), 1e-12);
    }
}

TEST(SingularValue, largest) {
    EXPECT_NEAR(largest_singular_value(diag(2, -3)), 3.0, 1e-15);
    TestRng rng(18);
    for (int t = 0; t < 50; ++t) {
        const Matrix2 m = random_complex_matrix(rng);
        Eigen::JacobiSVD<Matrix2> svd(m);
        EXPECT_NEAR(largest_singular_value(m), svd.singularValues()(0), 1e-12);
    }
}
