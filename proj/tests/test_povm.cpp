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

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>

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

double trace_product(const Matrix2& a, const Matrix2& b) { return (a * b).trace().real(); }

/// Rank of the 4 x n real coefficient matrix, by a generic SVD.
int hermitian_rank(const Povm& p) {
    Eigen::MatrixXd m(4, static_cast<Eigen::Index>(p.size()));
    for (std::size_t j = 0; j < p.size(); ++j) {
        const Matrix2& e = p.elements[j].matrix();
        m.col(static_cast<Eigen::Index>(j)) << e(0, 0).real(), e(1, 1).real(), e(0, 1).real(), e(0, 1).imag();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    int rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        rank += s(i) > 1e-9 * s(0) ? 1 : 0;
    }
    return rank;
}

/// Label distribution computed by walking the tree nodes directly.
std::map<int, double> tree_distribution(const LipovmTree& tree, const Matrix2& rho) {
    std::map<int, double> out;
    std::vector<std::pair<int, double>> stack{{0, 1.0}};
    while (!stack.empty()) {
        const auto [idx, prob] = stack.back();
        stack.pop_back();
        const auto& node = tree.nodes[static_cast<std::size_t>(idx)];
        if (node.leaf) {
            for (std::size_t j = 0; j < node.leaf->size(); ++j) {
                out[node.leaf->labels[j]] += prob * trace_product(node.leaf->elements[j].matrix(), rho);
            }
        } else {
            stack.emplace_back(node.child_a, prob * node.prob_a);
            stack.emplace_back(node.child_b, prob * node.prob_b);
        }
    }
    return out;
}

template <class F>
std::string error_text(ErrorKind expected, F&& f) {
    try {
        f();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), expected);
        return e.what();
    }
    ADD_FAILURE() << "no error raised";
    return {};
}

}  // namespace

TEST(ValidatePovm, examples) {
    const Povm p = validate_povm({herm(diag(1, 0)), herm(diag(0, 1))});
    EXPECT_EQ(p.size(), 2u);
    EXPECT_EQ(p.labels, (std::vector<int>{0, 1}));

    const HermitianOp half = herm(0.5 * Matrix2::Identity());
    const std::string c = error_text(ErrorKind::validation, [&] { validate_povm({half, half, half}); });
    EXPECT_NE(c.find("sum to the identity"), std::string::npos) << c;

    const std::string pos = error_text(ErrorKind::validation, [&] {
        validate_povm({herm(Matrix2::Identity() + sigma_z()), herm(-sigma_z())});
    });
    EXPECT_NE(pos.find("element 1"), std::string::npos) << pos;
    EXPECT_NE(pos.find("positiv"), std::string::npos) << pos;
}

TEST(ValidatePovm, labels) {
    const Povm p = validate_povm({herm(diag(1, 0)), herm(diag(0, 1))}, {7, 3});
    EXPECT_EQ(p.labels, (std::vector<int>{7, 3}));
    error_text(ErrorKind::validation, [&] { validate_povm({herm(diag(1, 0)), herm(diag(0, 1))}, {0}); });
    error_text(ErrorKind::validation, [&] { validate_povm({herm(diag(1, 0)), herm(diag(0, 1))}, {0, -1}); });
    error_text(ErrorKind::validation, [&] { validate_povm({}); });
    const Matrix2 nan = Matrix2::Constant(Cd(std::nan(""), 0));
    const std::string what =
        error_text(ErrorKind::validation, [&] { validate_povm({HermitianOp::hermitian_part(nan)}); });
    EXPECT_NE(what.find("non-finite"), std::string::npos) << what;
}

TEST(FindDependence, examples) {
    const HermitianOp half = herm(0.5 * Matrix2::Identity());
    const auto w = find_dependence(validate_povm({half, half}));
    ASSERT_TRUE(w.has_value());
    EXPECT_NEAR(w->c[w->order[0]], 1.0, 1e-12);
    EXPECT_NEAR(w->c[w->order[1]], -1.0, 1e-12);

    EXPECT_FALSE(find_dependence(fixtures::z_measurement()).has_value());
    EXPECT_FALSE(find_dependence(fixtures::trine()).has_value());
    EXPECT_FALSE(find_dependence(fixtures::sic()).has_value());
    EXPECT_TRUE(find_dependence(fixtures::sic_split5()).has_value());
}

TEST(FindDependence, witness_invariants_on_random_povms) {
    TestRng rng(21);
    for (int t = 0; t < 200; ++t) {
        const int n = rng.integer(2, 7);
        const Povm p = random_povm(rng, n, t % 2 == 0);
        const auto w = find_dependence(p);
        const bool dependent = hermitian_rank(p) < n;
        ASSERT_EQ(w.has_value(), dependent) << "n=" << n;
        if (n > 4) {
            EXPECT_TRUE(dependent);
        }
        if (!w) {
            continue;
        }
        Matrix2 sum = Matrix2::Zero();
        double max_c = 0.0;
        for (std::size_t j = 0; j < p.size(); ++j) {
            sum += w->c[j] * p.elements[j].matrix();
            max_c = std::max(max_c, std::abs(w->c[j]));
        }
        EXPECT_LT(max_abs(sum), 1e-9);
        EXPECT_NEAR(max_c, 1.0, 1e-15);
        for (std::size_t j = 1; j < w->order.size(); ++j) {
            EXPECT_GE(w->c[w->order[j - 1]], w->c[w->order[j]]);
        }
        EXPECT_GT(w->c[w->order.front()], 0.0);
        EXPECT_LT(w->c[w->order.back()], 0.0);
    }
}

TEST(SplitOnce, equal_halves) {
    const HermitianOp half = herm(0.5 * Matrix2::Identity());
    const Povm p = validate_povm({half, half});
    const SplitResult s = split_once(p, DependenceWitness{{1.0, -1.0}, {0, 1}});
    EXPECT_DOUBLE_EQ(s.prob_a, 0.5);
    EXPECT_DOUBLE_EQ(s.prob_b, 0.5);
    ASSERT_EQ(s.a.size(), 1u);
    ASSERT_EQ(s.b.size(), 1u);
    EXPECT_EQ(s.a.labels[0], 1);
    EXPECT_EQ(s.b.labels[0], 0);
    EXPECT_LT(max_abs(s.a.elements[0].matrix() - Matrix2::Identity()), 1e-15);
    EXPECT_LT(max_abs(s.b.elements[0].matrix() - Matrix2::Identity()), 1e-15);
}

TEST(SplitOnce, drops_zero_elements) {
    const Povm p = validate_povm({herm(diag(0.5, 0)), herm(diag(0, 0.5)), herm(0.5 * Matrix2::Identity())});
    const SplitResult s = split_once(p, DependenceWitness{{1.0, 1.0, -1.0}, {0, 1, 2}});
    EXPECT_DOUBLE_EQ(s.prob_a, 0.5);
    EXPECT_DOUBLE_EQ(s.prob_b, 0.5);
    ASSERT_EQ(s.a.size(), 1u);
    EXPECT_EQ(s.a.labels[0], 2);
    EXPECT_LT(max_abs(s.a.elements[0].matrix() - Matrix2::Identity()), 1e-15);
    ASSERT_EQ(s.b.size(), 2u);
    EXPECT_LT(max_abs(s.b.elements[0].matrix() - diag(1, 0)), 1e-15);
    EXPECT_LT(max_abs(s.b.elements[1].matrix() - diag(0, 1)), 1e-15);
    // Outcome 2 keeps probability P_A Tr[I rho] = 1/2 = Tr[E_2 rho].
    EXPECT_DOUBLE_EQ(s.prob_a * 1.0, 0.5);
}

TEST(SplitOnce, rejects_inconsistent_witness) {
    const Povm p = fixtures::sic_split5();
    DependenceWitness bad{{1.0, 0.0, 0.0, 0.0, -1.0}, {0, 1, 2, 3, 4}};
    error_text(ErrorKind::validation, [&] { split_once(p, bad); });
}

TEST(SplitOnce, probability_preservation_random) {
    TestRng rng(22);
    for (int t = 0; t < 100; ++t) {
        const int n = rng.integer(5, 8);
        const Povm p = random_povm(rng, n, t % 3 == 0);
        const auto w = find_dependence(p);
        ASSERT_TRUE(w);
        const SplitResult s = split_once(p, *w);
        EXPECT_NEAR(s.prob_a + s.prob_b, 1.0, 1e-15);
        EXPECT_GT(s.prob_a, 0.0);
        EXPECT_GT(s.prob_b, 0.0);
        EXPECT_LT(s.a.size(), p.size());
        EXPECT_LT(s.b.size(), p.size());
        const Matrix2 rho = random_density(rng);
        std::vector<double> got(static_cast<std::size_t>(n), 0.0);
        for (std::size_t j = 0; j < s.a.size(); ++j) {
            got[static_cast<std::size_t>(s.a.labels[j])] += s.prob_a * trace_product(s.a.elements[j].matrix(), rho);
        }
        for (std::size_t j = 0; j < s.b.size(); ++j) {
            got[static_cast<std::size_t>(s.b.labels[j])] += s.prob_b * trace_product(s.b.elements[j].matrix(), rho);
        }
        for (int i = 0; i < n; ++i) {
            EXPECT_NEAR(got[static_cast<std::size_t>(i)],
                        trace_product(p.elements[static_cast<std::size_t>(i)].matrix(), rho), 1e-10);
        }
    }
}

TEST(Decompose, independent_input_is_single_leaf) {
    const LipovmTree tree = decompose_to_lipovms(fixtures::sic());
    const auto leaves = tree.leaves();
    ASSERT_EQ(leaves.size(), 1u);
    EXPECT_EQ(leaves[0].probability, 1.0);
    EXPECT_EQ(tree.num_outcomes, 4);
}

TEST(Decompose, equal_halves) {
    const HermitianOp half = herm(0.5 * Matrix2::Identity());
    const LipovmTree tree = decompose_to_lipovms(validate_povm({half, half}));
    const auto leaves = tree.leaves();
    ASSERT_EQ(leaves.size(), 2u);
    for (const auto& leaf : leaves) {
        EXPECT_DOUBLE_EQ(leaf.probability, 0.5);
        ASSERT_EQ(leaf.povm->size(), 1u);
        EXPECT_LT(max_abs(leaf.povm->elements[0].matrix() - Matrix2::Identity()), 1e-15);
    }
    EXPECT_NE(leaves[0].povm->labels[0], leaves[1].povm->labels[0]);
}

TEST(Decompose, random_povms_reproduce_born_rule) {
    TestRng rng(23);
    for (int t = 0; t < 40; ++t) {
        const int n = t < 20 ? 6 : rng.integer(2, 9);
        const Povm p = random_povm(rng, n, t % 2 == 1);
        const LipovmTree tree = decompose_to_lipovms(p);
        double total = 0.0;
        for (const auto& leaf : tree.leaves()) {
            EXPECT_LE(leaf.povm->size(), 4u);
            EXPECT_EQ(hermitian_rank(*leaf.povm), static_cast<int>(leaf.povm->size()));
            total += leaf.probability;
        }
        EXPECT_NEAR(total, 1.0, 1e-12);
        for (const auto& node : tree.nodes) {
            if (!node.leaf) {
                EXPECT_NEAR(node.prob_a + node.prob_b, 1.0, 1e-15);
                EXPECT_GT(node.prob_a, 0.0);
                EXPECT_LT(node.prob_a, 1.0);
            }
        }
        for (int r = 0; r < 20; ++r) {
            const Matrix2 rho = random_density(rng);
            const auto dist = tree_distribution(tree, rho);
            const auto pipe = pipeline_probabilities(tree, herm(rho));
            ASSERT_EQ(pipe.size(), static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) {
                const double born = trace_product(p.elements[static_cast<std::size_t>(i)].matrix(), rho);
                const auto it = dist.find(i);
                EXPECT_NEAR(it == dist.end() ? 0.0 : it->second, born, 1e-9);
                EXPECT_NEAR(pipe[static_cast<std::size_t>(i)], born, 1e-9);
            }
        }
    }
}

TEST(ToPpovm, projective_input_is_unchanged) {
    const PpovmPlan plan = to_ppovm(fixtures::z_measurement());
    EXPECT_LT(max_abs(plan.projective[0].matrix() - diag(1, 0)), 1e-15);
    EXPECT_LT(max_abs(plan.projective[1].matrix() - diag(0, 1)), 1e-15);
    EXPECT_LT((plan.conditional - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ToPpovm, diagonal_example) {
    const Povm p = validate_povm({herm(diag(0.6, 0.2)), herm(diag(0.4, 0.8))});
    const PpovmPlan plan = to_ppovm(p);
    EXPECT_LT(max_abs(plan.projective[0].matrix() - diag(1, 0)), 1e-12);
    EXPECT_LT(max_abs(plan.projective[1].matrix() - diag(0, 1)), 1e-12);
    EXPECT_NEAR(plan.conditional(0, 0), 0.6, 1e-12);
    EXPECT_NEAR(plan.conditional(1, 0), 0.4, 1e-12);
    EXPECT_NEAR(plan.conditional(0, 1), 0.2, 1e-12);
    EXPECT_NEAR(plan.conditional(1, 1), 0.8, 1e-12);
}

TEST(ToPpovm, trine_is_already_projective) {
    const Povm trine = fixtures::trine();
    const PpovmPlan plan = to_ppovm(trine);
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_LT(max_abs(plan.projective[k].matrix() - trine.elements[k].matrix()), 1e-12);
        EXPECT_NEAR(plan.eigen[k].b, 0.0, 1e-12);
    }
    EXPECT_LT((plan.conditional - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(plan.active, (std::vector<int>{0, 1, 2}));
}

TEST(ToPpovm, identity_element_is_dropped_but_routed) {
    // {I/2 , |0><0|/2, |1><1|/2}: element 0 is proportional to I.
    const Povm p = validate_povm({herm(0.5 * Matrix2::Identity()), herm(diag(0.5, 0)), herm(diag(0, 0.5))});
    const PpovmPlan plan = to_ppovm(p);
    EXPECT_EQ(plan.active, (std::vector<int>{1, 2}));
    EXPECT_LT(max_abs(plan.projective[0].matrix()), 1e-15);
    EXPECT_NEAR(plan.conditional(0, 1), 0.5, 1e-12);
    EXPECT_NEAR(plan.conditional(0, 2), 0.5, 1e-12);
    EXPECT_EQ(plan.walk_povm().size(), 2u);
}

TEST(ToPpovm, invariants_on_random_povms) {
    TestRng rng(24);
    for (int t = 0; t < 200; ++t) {
        const bool rank_one = t % 4 == 0;
        const int n = rng.integer(rank_one ? 2 : 1, 6);
        const Povm p = random_povm(rng, n, rank_one);
        const PpovmPlan plan = to_ppovm(p);
        const auto ns = static_cast<std::size_t>(n);
        double b_sum = 0.0;
        for (std::size_t i = 0; i < ns; ++i) {
            b_sum += plan.eigen[i].b;
            EXPECT_GE(plan.eigen[i].a, plan.eigen[i].b);
            // Independent eigen route.
            Eigen::SelfAdjointEigenSolver<Matrix2> es(p.elements[i].matrix());
            EXPECT_NEAR(plan.eigen[i].a, es.eigenvalues()(1), 1e-12);
            EXPECT_NEAR(plan.eigen[i].b, es.eigenvalues()(0), 1e-12);
        }
        Matrix2 proj_sum = Matrix2::Zero();
        for (std::size_t k = 0; k < ns; ++k) {
            const BlochForm f = pauli_decompose(plan.projective[k]);
            const bool zero = max_abs(plan.projective[k].matrix()) < 1e-14;
            if (!zero && n >= 2) {
                EXPECT_NEAR(f.v.norm(), 1.0, 1e-10);
            }
            proj_sum += plan.projective[k].matrix();
            EXPECT_NEAR(plan.conditional.col(static_cast<Eigen::Index>(k)).sum(), 1.0, 1e-12);
            EXPECT_GE(plan.conditional.col(static_cast<Eigen::Index>(k)).minCoeff(), -1e-14);
            for (std::size_t i = 0; i < ns; ++i) {
                const double expect = (i == k ? 1.0 - b_sum : 0.0) + plan.eigen[i].b;
                EXPECT_NEAR(plan.conditional(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)), expect,
                            1e-12);
            }
        }
        if (n >= 2) {
            EXPECT_LT(max_abs(proj_sum - Matrix2::Identity()), 1e-10);
        }
        for (std::size_t i = 0; i < ns; ++i) {
            Matrix2 rebuilt = Matrix2::Zero();
            for (std::size_t k = 0; k < ns; ++k) {
                rebuilt += plan.conditional(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) *
                           plan.projective[k].matrix();
            }
            EXPECT_LT(max_abs(rebuilt - p.elements[i].matrix()), 1e-10);
        }
        if (hermitian_rank(p) == n && n >= 2) {
            EXPECT_EQ(hermitian_rank(plan.walk_povm()), static_cast<int>(plan.active.size()));
            EXPECT_EQ(plan.active.size(), ns);
        }
    }
}

TEST(BornProbabilities, examples) {
    const HermitianOp mixed = herm(0.5 * Matrix2::Identity());
    for (double v : born_probabilities(fixtures::sic(), mixed)) {
        EXPECT_NEAR(v, 0.25, 1e-15);
    }
    const Ket plus = Ket(1, 1) / std::sqrt(2.0);
    const auto trine = born_probabilities(fixtures::trine(), HermitianOp::outer(plus));
    EXPECT_NEAR(trine[0], 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(trine[1], 1.0 / 6.0, 1e-15);
    EXPECT_NEAR(trine[2], 1.0 / 6.0, 1e-15);
    const auto z = born_probabilities(fixtures::z_measurement(), herm(diag(1, 0)));
    EXPECT_EQ(z[0], 1.0);
    EXPECT_EQ(z[1], 0.0);
}

TEST(BornProbabilities, rejects_invalid_states) {
    error_text(ErrorKind::validation, [] { born_probabilities(fixtures::trine(), herm(diag(1, 1))); });
    error_text(ErrorKind::validation, [] { born_probabilities(fixtures::trine(), herm(diag(1.5, -0.5))); });
}

TEST(Fixtures, match_analytic_definitions) {
    const Povm trine = fixtures::trine();
    for (int k = 0; k < 3; ++k) {
        const double a = 2.0 * std::numbers::pi * k / 3.0;
        const Matrix2 expect = (1.0 / 3.0) * (Matrix2::Identity() + pauli_vector(Vec3(std::cos(a), std::sin(a), 0)));
        EXPECT_LT(max_abs(trine.elements[static_cast<std::size_t>(k)].matrix() - expect), 1e-15);
    }
    const Povm sic = fixtures::sic();
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            const double overlap = trace_product(sic.elements[i].matrix(), sic.elements[j].matrix());
            EXPECT_NEAR(overlap, i == j ? 1.0 / 4.0 : 1.0 / 12.0, 1e-15);
        }
    }
    const Povm s5 = fixtures::sic_split5();
    EXPECT_EQ(s5.size(), 5u);
    EXPECT_LT(max_abs(s5.elements[0].matrix() - 0.3 * sic.elements[0].matrix()), 1e-15);
    EXPECT_LT(max_abs(s5.elements[1].matrix() - 0.7 * sic.elements[0].matrix()), 1e-15);
}
