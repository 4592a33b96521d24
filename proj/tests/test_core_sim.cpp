// Copyright 2026 The qntk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qntk/dense_operator.hpp"
#include "qntk/error.hpp"
#include "qntk/haar.hpp"
#include "qntk/observable.hpp"
#include "qntk/pauli.hpp"
#include "qntk/rng.hpp"
#include "qntk/state_vector.hpp"

using namespace qntk;
using oracle::C;

namespace {

constexpr double kPi = std::numbers::pi;

double max_diff(const StateVector &a, const oracle::Vec &b) { return (oracle::to_vec(a) - b).cwiseAbs().maxCoeff(); }

std::string random_label(int n, Rng &rng, bool allow_identity = true) {
    static const char kChars[] = {'I', 'X', 'Y', 'Z'};
    std::string s;
    do {
        s.clear();
        for (int q = 0; q < n; ++q) {
            s.push_back(kChars[rng.index(4)]);
        }
    } while (!allow_identity && s.find_first_not_of('I') == std::string::npos);
    return s;
}

} // namespace

TEST(Rng, SplitmixDerivationIsDeterministicAndDistinct) {
    EXPECT_EQ(derive_seed(5, 3), derive_seed(5, 3));
    EXPECT_NE(derive_seed(5, 3), derive_seed(5, 4));
    EXPECT_NE(derive_seed(5, 3), derive_seed(6, 3));
}

TEST(Rng, UniformAndNormalMoments) {
    Rng rng(11);
    const int n = 200000;
    double su = 0.0, sn = 0.0, sn2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        su += u;
        const double z = rng.normal();
        sn += z;
        sn2 += z * z;
    }
    EXPECT_NEAR(su / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
    EXPECT_NEAR(sn / n, 0.0, 4.0 / std::sqrt(n));
    EXPECT_NEAR(sn2 / n, 1.0, 4.0 * std::sqrt(2.0 / n));
}

TEST(Rng, IndexStaysInRange) {
    Rng rng(2);
    for (int i = 0; i < 10000; ++i) {
        ASSERT_LT(rng.index(3), 3u);
    }
}

TEST(StateVector, DefaultIsAllZeros) {
    StateVector s(3);
    EXPECT_EQ(s.dim(), 8u);
    EXPECT_EQ(s[0], C(1.0));
    EXPECT_NEAR(s.norm_squared(), 1.0, 1e-15);
}

TEST(StateVector, RejectsBadLengthAndNorm) {
    EXPECT_THROW(StateVector::from_amplitudes(2, {C(1.0), C(0.0)}), DimensionError);
    EXPECT_THROW(StateVector::from_amplitudes(1, {C(1.0), C(1.0)}), OperatorError);
    EXPECT_NO_THROW(StateVector::from_amplitudes(1, {C(1.0 / std::sqrt(2.0)), C(0.0, 1.0 / std::sqrt(2.0))}));
}

TEST(StateVector, RandomStateIsNormalized) {
    Rng rng(3);
    for (int n = 1; n <= 6; ++n) {
        EXPECT_NEAR(StateVector::random(n, rng).norm_squared(), 1.0, 1e-12);
    }
}

TEST(Pauli, LabelRoundTripAndQubitOrder) {
    const auto p = PauliString::from_label("ZIXY");
    EXPECT_EQ(p.label(), "ZIXY");
    EXPECT_EQ(p.at(0), Pauli::Z);
    EXPECT_EQ(p.at(3), Pauli::Y);
    EXPECT_EQ(oracle::max_abs(p.to_dense() - oracle::pauli_dense("ZIXY")), 0.0);
    EXPECT_THROW(PauliString::from_label("ZQ"), std::invalid_argument);
}

TEST(Pauli, SquaresToIdentityAndIsHermitian) {
    Rng rng(4);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 1 + static_cast<int>(rng.index(4));
        const auto p = PauliString::from_label(random_label(n, rng));
        const ComplexMatrix m = p.to_dense();
        EXPECT_LT(oracle::max_abs(m * m - ComplexMatrix::Identity(m.rows(), m.cols())), 1e-15);
        EXPECT_LT(hermiticity_defect(m), 1e-15);
    }
}

TEST(Pauli, TraceIsZeroUnlessIdentity) {
    EXPECT_EQ(PauliString::from_label("III").trace(), 8.0);
    EXPECT_EQ(PauliString::from_label("IZI").trace(), 0.0);
    EXPECT_EQ(PauliString::from_label("XYZ").trace(), 0.0);
}

TEST(Pauli, MultiplyMatchesDenseProduct) {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + static_cast<int>(rng.index(3));
        const auto a = PauliString::from_label(random_label(n, rng));
        const auto b = PauliString::from_label(random_label(n, rng));
        const auto [phase, prod] = multiply(a, b);
        const oracle::Mat expected = oracle::pauli_dense(a.label()) * oracle::pauli_dense(b.label());
        EXPECT_LT(oracle::max_abs(phase * oracle::pauli_dense(prod.label()) - expected), 1e-15);
        EXPECT_EQ(a.commutes_with(b), oracle::max_abs(expected - oracle::pauli_dense(b.label()) * oracle::pauli_dense(a.label())) < 1e-12);
    }
}

TEST(PauliRotation, ZeroAngleIsIdentity) {
    Rng rng(6);
    const auto s = StateVector::random(3, rng);
    EXPECT_EQ(apply_pauli_rotation(s, PauliString::from_label("XYZ"), 0.0), s);
}

TEST(PauliRotation, HalfPiXOnZeroGivesIOne) {
    const auto out = apply_pauli_rotation(StateVector(1), PauliString::from_label("X"), kPi / 2.0);
    EXPECT_NEAR(std::abs(out[0]), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(out[1] - C(0.0, 1.0)), 0.0, 1e-15);
}

TEST(PauliRotation, MatchesDenseMatrixExponential) {
    Rng rng(7);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 1 + static_cast<int>(rng.index(5));
        const std::string label = random_label(n, rng);
        const double theta = rng.uniform(-2.0 * kPi, 2.0 * kPi);
        const auto s = StateVector::random(n, rng);
        const auto out = apply_pauli_rotation(s, PauliString::from_label(label), theta);
        const oracle::Vec expected = oracle::expi(oracle::pauli_dense(label), theta) * oracle::to_vec(s);
        EXPECT_LT(max_diff(out, expected), 1e-12) << label;
        EXPECT_NEAR(out.norm_squared(), 1.0, 1e-12);
    }
}

TEST(PauliRotation, PiShiftFlipsSign) {
    Rng rng(8);
    const auto s = StateVector::random(3, rng);
    const auto p = PauliString::from_label("YXZ");
    const auto a = apply_pauli_rotation(s, p, 0.37);
    const auto b = apply_pauli_rotation(s, p, 0.37 + kPi);
    for (std::size_t i = 0; i < a.dim(); ++i) {
        EXPECT_NEAR(std::abs(a[i] + b[i]), 0.0, 1e-14);
    }
}

TEST(PauliRotation, QubitMismatchThrows) {
    EXPECT_THROW(apply_pauli_rotation(StateVector(2), PauliString::from_label("X"), 0.1), DimensionError);
    EXPECT_THROW(apply_pauli(StateVector(2), PauliString::from_label("XXX")), DimensionError);
}

TEST(NormPreservation, TenThousandGates) {
    Rng rng(9);
    const int n = 4;
    auto s = StateVector::random(n, rng);
    for (int g = 0; g < 10000; ++g) {
        if (g % 2 == 0) {
            apply_pauli_rotation_inplace(s, PauliString::from_label(random_label(n, rng)), rng.uniform(0.0, 2.0 * kPi));
        } else {
            const int a = static_cast<int>(rng.index(n));
            const int b = (a + 1) % n;
            apply_local_inplace(s, LocalUnitary{{a, b}, haar_matrix(4, rng)});
        }
    }
    EXPECT_LT(std::abs(s.norm_squared() - 1.0), 1e-9);
}

TEST(DenseOperator, FactoriesValidate) {
    ComplexMatrix m(2, 2);
    m << 1, 1, 0, 1;
    EXPECT_THROW(DenseOperator::unitary(1, m), OperatorError);
    EXPECT_THROW(DenseOperator::hermitian(1, m), OperatorError);
    EXPECT_THROW(DenseOperator::unitary(2, ComplexMatrix::Identity(2, 2)), DimensionError);
    EXPECT_TRUE(DenseOperator::identity(2).is_unitary());
}

TEST(ApplyDense, IdentityAndHadamard) {
    Rng rng(10);
    const auto s = StateVector::random(2, rng);
    EXPECT_EQ(apply_dense(s, DenseOperator::identity(2)), s);
    ComplexMatrix h(2, 2);
    h << 1, 1, 1, -1;
    h /= std::sqrt(2.0);
    const auto out = apply_dense(StateVector(1), DenseOperator::unitary(1, h));
    EXPECT_NEAR(std::abs(out[0] - C(1.0 / std::sqrt(2.0))), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(out[1] - C(1.0 / std::sqrt(2.0))), 0.0, 1e-15);
}

TEST(ApplyDense, TwiceEqualsSquare) {
    const auto u = haar_unitary(3, 21);
    Rng rng(12);
    const auto s = StateVector::random(3, rng);
    const auto twice = apply_dense(apply_dense(s, u), u);
    const oracle::Vec expected = (u.matrix() * u.matrix()) * oracle::to_vec(s);
    EXPECT_LT(max_diff(twice, expected), 1e-12);
    EXPECT_NEAR(twice.norm_squared(), 1.0, 1e-10);
}

TEST(ApplyDense, RequiresUnitaryFlagAndMatchingSize) {
    const DenseOperator plain(1, ComplexMatrix::Identity(2, 2));
    EXPECT_THROW(apply_dense(StateVector(1), plain), OperatorError);
    EXPECT_THROW(apply_dense(StateVector(2), DenseOperator::identity(1)), DimensionError);
}

TEST(LocalUnitary, InPlaceMatchesExplicitEmbedding) {
    Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(rng.index(4));
        const int a = static_cast<int>(rng.index(n));
        int b = static_cast<int>(rng.index(n));
        while (b == a) {
            b = static_cast<int>(rng.index(n));
        }
        const LocalUnitary g{{a, b}, haar_matrix(4, rng)};
        auto s = StateVector::random(n, rng);
        const oracle::Vec expected = oracle::embed(g.block, g.wires, n) * oracle::to_vec(s);
        EXPECT_LT(oracle::max_abs(g.embed(n) - oracle::embed(g.block, g.wires, n)), 1e-15);
        apply_local_inplace(s, g);
        EXPECT_LT(max_diff(s, expected), 1e-12);
    }
}

TEST(Expectation, BasicValues) {
    EXPECT_DOUBLE_EQ(expectation(StateVector(1), Observable::pauli(PauliString::from_label("Z"))), 1.0);
    const auto plus = StateVector::from_amplitudes(1, {C(1.0 / std::sqrt(2.0)), C(1.0 / std::sqrt(2.0))});
    EXPECT_NEAR(expectation(plus, Observable::pauli(PauliString::from_label("X"))), 1.0, 1e-15);
}

TEST(Expectation, MatchesDenseQuadraticForm) {
    Rng rng(14);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + static_cast<int>(rng.index(4));
        const auto s = StateVector::random(n, rng);
        const oracle::Mat h = oracle::random_hermitian(Eigen::Index{1} << n, rng);
        const double expected = (oracle::to_vec(s).adjoint() * h * oracle::to_vec(s))(0, 0).real();
        EXPECT_NEAR(expectation(s, DenseOperator::hermitian(n, h)), expected, 1e-12);
        EXPECT_NEAR(expectation(s, Observable::dense(DenseOperator::hermitian(n, h))), expected, 1e-12);

        std::vector<PauliTerm> terms;
        oracle::Mat dense = oracle::Mat::Zero(Eigen::Index{1} << n, Eigen::Index{1} << n);
        for (int k = 0; k < 4; ++k) {
            const std::string label = random_label(n, rng);
            const double c = rng.normal();
            terms.push_back({c, PauliString::from_label(label)});
            dense += c * oracle::pauli_dense(label);
        }
        const double pauli_expected = (oracle::to_vec(s).adjoint() * dense * oracle::to_vec(s))(0, 0).real();
        EXPECT_NEAR(expectation(s, Observable::pauli_sum(n, terms)), pauli_expected, 1e-12);
    }
}

TEST(Expectation, RejectsNonHermitianAndMismatch) {
    ComplexMatrix m(2, 2);
    m << 0, 1, 0, 0;
    EXPECT_THROW(expectation(StateVector(1), DenseOperator(1, m)), OperatorError);
    EXPECT_THROW(expectation(StateVector(2), Observable::magnetization(1)), DimensionError);
}

TEST(Observable, ParseForms) {
    const auto m = Observable::parse(3, "magnetization");
    EXPECT_EQ(m.terms().size(), 3u);
    const auto z0 = Observable::parse(3, "Z0");
    ASSERT_EQ(z0.terms().size(), 1u);
    EXPECT_EQ(z0.terms()[0].string.label(), "ZII");
    const auto sum = Observable::parse(2, "0.5*ZZ + XI + 0.5*ZZ");
    ASSERT_EQ(sum.terms().size(), 2u);
    EXPECT_THROW(Observable::parse(2, "ZZZ"), ConfigError);
    EXPECT_THROW(Observable::parse(2, "Z5"), ConfigError);
    EXPECT_THROW(Observable::parse(2, "ZZ+"), ConfigError);
    EXPECT_THROW(Observable::parse(2, "a*ZZ"), ConfigError);
}

TEST(TracePowers, PauliAndIdentity) {
    const auto zz = trace_powers(Observable::pauli(PauliString::from_label("ZZ")));
    EXPECT_DOUBLE_EQ(zz.tr1, 0.0);
    EXPECT_DOUBLE_EQ(zz.tr2, 4.0);
    EXPECT_DOUBLE_EQ(zz.tr4, 4.0);
    const auto id = trace_powers(Observable::identity(2));
    EXPECT_DOUBLE_EQ(id.tr1, 4.0);
    EXPECT_DOUBLE_EQ(id.tr2, 4.0);
    EXPECT_DOUBLE_EQ(id.tr4, 4.0);
}

TEST(TracePowers, MatchEigenvalueSums) {
    Rng rng(15);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 1 + static_cast<int>(rng.index(4));
        const oracle::Mat h = oracle::random_hermitian(Eigen::Index{1} << n, rng);
        const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<oracle::Mat>(h).eigenvalues();
        double s1 = 0.0, s2 = 0.0, s4 = 0.0;
        for (double l : ev) {
            s1 += l;
            s2 += l * l;
            s4 += l * l * l * l;
        }
        const auto tp = trace_powers(DenseOperator::hermitian(n, h));
        EXPECT_NEAR(tp.tr1, s1, 1e-10 * std::max(1.0, std::abs(s1)));
        EXPECT_NEAR(tp.tr2, s2, 1e-10 * s2);
        EXPECT_NEAR(tp.tr4, s4, 1e-10 * s4);

        // Pauli-sum path against the eigenvalues of its dense form.
        std::vector<PauliTerm> terms;
        for (int k = 0; k < 5; ++k) {
            terms.push_back({rng.normal(), PauliString::from_label(random_label(n, rng))});
        }
        const auto o = Observable::pauli_sum(n, terms);
        const Eigen::VectorXd pev = Eigen::SelfAdjointEigenSolver<oracle::Mat>(o.to_dense()).eigenvalues();
        double p1 = 0.0, p2 = 0.0, p4 = 0.0;
        for (double l : pev) {
            p1 += l;
            p2 += l * l;
            p4 += l * l * l * l;
        }
        const auto ptp = trace_powers(o);
        EXPECT_NEAR(ptp.tr1, p1, 1e-10 * std::max(1.0, std::abs(p1)));
        EXPECT_NEAR(ptp.tr2, p2, 1e-10 * std::max(1.0, p2));
        EXPECT_NEAR(ptp.tr4, p4, 1e-10 * std::max(1.0, p4));
    }
}

TEST(Haar, UnitaryAndDeterministic) {
    for (int n = 1; n <= 4; ++n) {
        const auto u = haar_unitary(n, 100 + n);
        EXPECT_LT(unitarity_defect(u.matrix()), 1e-10);
        EXPECT_EQ(u.matrix(), haar_unitary(n, 100 + n).matrix());
    }
    EXPECT_THROW(haar_unitary(kMaxDenseQubits + 1, 0), ResourceError);
}

// E|U_00|^4 for U(2) from the angle parametrization
// U = [[e^{ia} cos t, ...], ...] with Haar density proportional to sin(2t) on [0, pi/2].
double quadrature_fourth_moment() {
    const int n = 4000;
    const double h = (kPi / 2.0) / n;
    double num = 0.0;
    double den = 0.0;
    for (int i = 0; i < n; ++i) {
        const double t = (i + 0.5) * h; // midpoint rule
        const double w = std::sin(2.0 * t);
        num += std::pow(std::cos(t), 4) * w;
        den += w;
    }
    return num / den;
}

TEST(Haar, MomentsMatchTheory) {
    const int samples = 10000;
    for (std::size_t dim : {std::size_t{2}, std::size_t{4}}) {
        Rng rng(derive_seed(77, dim));
        const auto d = static_cast<Eigen::Index>(dim);
        std::vector<C> first(dim * dim);
        std::vector<double> first_abs(dim * dim);
        std::vector<C> second(dim * dim * dim * dim);
        std::vector<double> second_abs(second.size());
        double f4 = 0.0, f4sq = 0.0;
        for (int s = 0; s < samples; ++s) {
            const ComplexMatrix u = haar_matrix(dim, rng);
            for (Eigen::Index i = 0; i < d; ++i) {
                for (Eigen::Index j = 0; j < d; ++j) {
                    const auto a = static_cast<std::size_t>(i * d + j);
                    first[a] += u(i, j);
                    first_abs[a] += std::norm(u(i, j));
                    for (Eigen::Index k = 0; k < d; ++k) {
                        for (Eigen::Index l = 0; l < d; ++l) {
                            const auto b = static_cast<std::size_t>(k * d + l);
                            // U_ij (U^dag)_lk = U_ij conj(U_kl)
                            const C v = u(i, j) * std::conj(u(k, l));
                            second[a * dim * dim + b] += v;
                            second_abs[a * dim * dim + b] += std::norm(v);
                        }
                    }
                }
            }
            const double x = std::pow(std::norm(u(0, 0)), 2);
            f4 += x;
            f4sq += x * x;
        }
        auto within = [&](C sum, double sum_abs, C target) {
            const C mean = sum / static_cast<double>(samples);
            const double var = (sum_abs / samples - std::norm(mean)) * samples / (samples - 1.0);
            return std::abs(mean - target) <= 3.0 * std::sqrt(var / samples);
        };
        for (std::size_t a = 0; a < dim * dim; ++a) {
            EXPECT_TRUE(within(first[a], first_abs[a], 0.0)) << "first moment dim " << dim;
            for (std::size_t b = 0; b < dim * dim; ++b) {
                const C target = a == b ? C(1.0 / static_cast<double>(dim)) : C(0.0);
                EXPECT_TRUE(within(second[a * dim * dim + b], second_abs[a * dim * dim + b], target))
                    << "second moment dim " << dim << " entry " << a << "," << b;
            }
        }
        const double mean4 = f4 / samples;
        const double se4 = std::sqrt((f4sq / samples - mean4 * mean4) / (samples - 1.0));
        const double target4 = dim == 2 ? quadrature_fourth_moment() : 2.0 / (dim * (dim + 1.0));
        EXPECT_NEAR(mean4, target4, 3.0 * se4) << "dim " << dim;
    }
}

TEST(Haar, QuadratureOracleSelfCheck) {
    // Independent of the sampler: the closed form for U(2) is 1/3.
    EXPECT_NEAR(quadrature_fourth_moment(), 1.0 / 3.0, 1e-6);
}
