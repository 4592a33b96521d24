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
#include <limits>
#include <numbers>

#include <gtest/gtest.h>

#include "qntk/observable.hpp"
#include "qntk/theory.hpp"

using namespace qntk;
using namespace qntk::theory;

namespace {

TracePowers pauli_traces(double dim) { return {0.0, dim, dim}; }

} // namespace

TEST(Kbar, PauliSingleLayerAtFourDims) {
    EXPECT_NEAR(kbar_exact(1.0, pauli_traces(4.0), 4.0), 32.0 / 75.0, 1e-15);
}

TEST(Kbar, IdentityGivesZero) {
    EXPECT_DOUBLE_EQ(kbar_exact(10.0, trace_powers(Observable::identity(3)), 8.0), 0.0);
}

TEST(Kbar, LargeNFormAtWorkingPoint) {
    EXPECT_DOUBLE_EQ(kbar_large_n(64.0, pauli_traces(16.0), 16.0), 8.0);
}

TEST(Kbar, NeedsTwoDimensions) {
    EXPECT_THROW(kbar_exact(1.0, pauli_traces(1.0), 1.0), std::invalid_argument);
}

TEST(Kbar, ExactApproachesLargeNWithinTwoOverN) {
    for (double dim = 4.0; dim <= 256.0; dim *= 2.0) {
        const double exact = kbar_exact(7.0, pauli_traces(dim), dim);
        const double large = kbar_large_n(7.0, pauli_traces(dim), dim);
        EXPECT_LE(std::abs(exact - large) / large, 2.0 / dim) << dim;
    }
}

TEST(DeltaK, PauliSubstitution) {
    for (double dim : {4.0, 16.0, 64.0}) {
        const double l = 9.0;
        EXPECT_NEAR(delta_k(l, pauli_traces(dim), dim),
                    std::sqrt(l) / (dim * dim) * std::sqrt(8.0 * dim * dim + 12.0 * dim), 1e-14);
    }
}

TEST(DeltaK, RatioHalvesBySqrtTwoWhenDoublingL) {
    const auto tp = trace_powers(Observable::magnetization(3));
    for (double l : {1.0, 8.0, 100.0}) {
        EXPECT_NEAR(delta_k_ratio(2.0 * l, tp, 8.0) / delta_k_ratio(l, tp, 8.0), 1.0 / std::sqrt(2.0), 1e-14);
    }
    EXPECT_LT(delta_k_ratio(1e12, tp, 8.0), 1e-5);
}

TEST(DeltaMu, PauliSubstitutionAndZeroDepth) {
    const double dim = 16.0;
    EXPECT_NEAR(delta_mu(8.0, pauli_traces(dim), dim), std::sqrt(32.0) * 8.0 / std::pow(dim, 1.5), 1e-14);
    EXPECT_DOUBLE_EQ(delta_mu(0.0, pauli_traces(dim), dim), 0.0);
}

TEST(Decay, BasicCases) {
    EXPECT_DOUBLE_EQ(decay_prediction(0.7, 0.01, 20.0, 0).value, 0.7);
    for (long long t = 1; t < 5; ++t) {
        EXPECT_DOUBLE_EQ(decay_prediction(0.7, 0.05, 20.0, t).value, 0.0);
    }
    EXPECT_TRUE(decay_prediction(1.0, 0.1, 25.0, 3).divergent);
    EXPECT_FALSE(decay_prediction(1.0, 0.005, 25.0, 3).divergent);
    EXPECT_THROW(decay_prediction(1.0, 0.1, 1.0, -1), std::invalid_argument);
}

TEST(Decay, WorkingPointValue) {
    const double v = decay_prediction(1.0, 0.005, 25.0, 100).value;
    EXPECT_NEAR(v, std::exp(100.0 * std::log(0.875)), 1e-20);
    EXPECT_NEAR(v, 1.58e-6, 0.01e-6);
}

TEST(Decay, StepRatioIsExact) {
    for (long long t = 0; t < 50; ++t) {
        const double r = decay_prediction(0.9, 0.003, 41.0, t + 1).value / decay_prediction(0.9, 0.003, 41.0, t).value;
        EXPECT_NEAR(r, 1.0 - 0.003 * 41.0, 1e-14);
    }
}

TEST(Noisy, StartAndNoiselessLimit) {
    EXPECT_NEAR(noisy_mean_sq(0.8, 0.005, 30.0, 0.01, 0.0).value, 0.64, 1e-15);
    for (double t : {1.0, 10.0, 55.0}) {
        const double d = decay_prediction(0.8, 0.005, 30.0, static_cast<long long>(t)).value;
        EXPECT_NEAR(noisy_mean_sq(0.8, 0.005, 30.0, 0.0, t).value, d * d, 1e-15);
    }
}

TEST(Noisy, PlateauAndHalfNormalMean) {
    const double eta = 0.005, k = 30.0, s = 1e-3;
    const auto p = plateau(eta, k, s);
    EXPECT_TRUE(p.convergent);
    EXPECT_NEAR(p.value, s * s / (eta * (2.0 - eta * k)), 1e-18);
    EXPECT_NEAR(noisy_mean_sq(1.0, eta, k, s, 1e5).value, p.value, 1e-15);
    EXPECT_NEAR(half_normal_mean(eta, k, s).value, std::sqrt(2.0 / std::numbers::pi) * std::sqrt(p.value), 1e-15);
    EXPECT_FALSE(plateau(0.1, 25.0, s).convergent);
    EXPECT_FALSE(plateau(0.0, 25.0, s).convergent);
}

TEST(Noisy, MonotoneTowardPlateau) {
    const double eta = 0.005, k = 30.0;
    for (double s : {1e-3, 0.2}) {
        const double p = plateau(eta, k, s).value;
        const double e0 = 0.3;
        const bool above = e0 * e0 > p;
        double prev = noisy_mean_sq(e0, eta, k, s, 0.0).value;
        for (int t = 1; t < 300; ++t) {
            const double cur = noisy_mean_sq(e0, eta, k, s, t).value;
            if (above) {
                EXPECT_LE(cur, prev * (1.0 + 1e-12));
                EXPECT_GE(cur, p * (1.0 - 1e-12));
            } else {
                EXPECT_GE(cur, prev * (1.0 - 1e-12));
                EXPECT_LE(cur, p * (1.0 + 1e-12));
            }
            prev = cur;
        }
    }
}

TEST(TNoise, NoiselessIsInfinite) {
    const auto t = t_noise(1.0, 0.005, 30.0, 0.0);
    EXPECT_TRUE(std::isinf(t.value));
    EXPECT_TRUE(t.valid);
}

TEST(TNoise, LargeNoiseGoesToZero) {
    double prev = std::numeric_limits<double>::infinity();
    for (double s : {1e-2, 1.0, 1e2, 1e4}) {
        const double t = t_noise(1.0, 0.005, 30.0, s).value;
        EXPECT_LT(t, prev);
        EXPECT_GT(t, 0.0);
        prev = t;
    }
    EXPECT_LT(prev, 1e-3);
}

TEST(TNoise, SatisfiesBalanceEquation) {
    for (double eta : {0.001, 0.005, 0.02}) {
        for (double k : {5.0, 30.0}) {
            for (double s : {1e-4, 1e-3, 1e-2}) {
                for (double e0 : {0.3, 1.0}) {
                    const auto t = t_noise(e0, eta, k, s);
                    ASSERT_TRUE(t.valid);
                    const double r = 1.0 - eta * k;
                    const double lhs = std::pow(r, t.value) * e0;
                    const double rhs = s * std::sqrt((1.0 - std::pow(r, 2.0 * t.value)) / (eta * (2.0 - eta * k)));
                    EXPECT_NEAR(lhs, rhs, 1e-9);
                }
            }
        }
    }
}

TEST(TNoise, FlagsInvalidRegime) {
    EXPECT_FALSE(t_noise(1.0, 0.05, 30.0, 1e-3).valid);
    EXPECT_FALSE(t_noise(1.0, 0.0, 30.0, 1e-3).valid);
}

TEST(TNoise, CrossoverResidualMinimizedNearInverseK) {
    const double e0 = 1.0, k = 30.0, s = 1e-3;
    double best_eta = 0.0, best = std::numeric_limits<double>::infinity();
    const int grid = 4000;
    for (int i = 1; i < grid; ++i) {
        const double eta = 2.0 / k * i / grid;
        const double v = crossover_residual(e0, eta, k, s);
        if (v < best) {
            best = v;
            best_eta = eta;
        }
    }
    EXPECT_NEAR(best_eta * k, 1.0, 2.0 / grid * 2.0);
    // Consistency with 2 (1 - eta K)^T eps0 at the returned T.
    const double eta = 0.005;
    const double t = t_noise(e0, eta, k, s).value;
    EXPECT_NEAR(crossover_residual(e0, eta, k, s), 2.0 * std::pow(1.0 - eta * k, t) * e0, 1e-12);
}

TEST(Precision, Examples) {
    EXPECT_DOUBLE_EQ(precision_log_inverse(0.005, 64.0, 16.0, 16.0, 0.0), 0.0);
    EXPECT_NEAR(precision_log_inverse(0.005, 64.0, 16.0, 16.0, 100.0), 4.0, 1e-12);
    const double t1 = precision_steps(0.005, 32.0, 16.0, 16.0, 1e-3);
    const double t2 = precision_steps(0.005, 64.0, 16.0, 16.0, 1e-3);
    EXPECT_NEAR(t2, t1 / 2.0, 1e-9);
    EXPECT_NEAR(precision_steps(0.005, 64.0, 16.0, 16.0, std::exp(-4.0)), 100.0, 1e-9);
    EXPECT_THROW(precision_steps(0.005, 64.0, 16.0, 16.0, 0.0), std::invalid_argument);
    // The precision relation is the small-step limit of the frozen-kernel decay at K = Kbar.
    const double k = kbar_large_n(64.0, pauli_traces(16.0), 16.0);
    EXPECT_NEAR(-100.0 * std::log(1.0 - 0.005 * k) / 4.0, 1.0, 0.03);
}

TEST(Concentration, WorkingPointMargins) {
    const auto report = make_report(64, 16.0, pauli_traces(16.0), 0.005, 0.0, 1.0);
    const auto c = concentration_check(report);
    const double n = 16.0;
    const double expected_ratio = std::sqrt(8.0 * n * n + 12.0 * n) / (2.0 * n) / 8.0;
    EXPECT_NEAR(c.kernel_concentration.ratio, expected_ratio, 1e-12);
    EXPECT_NEAR(c.kernel_concentration.ratio, 0.1849, 1e-4);
    EXPECT_FALSE(c.kernel_concentration.pass);
    EXPECT_NEAR(c.meta_kernel.ratio, 1.25e-3, 1e-15);
    EXPECT_TRUE(c.meta_kernel.pass);
    EXPECT_DOUBLE_EQ(c.threshold, 0.1);
}

TEST(Concentration, SingleLayerFailsKernelCondition) {
    const auto c = concentration_check(make_report(1, 16.0, pauli_traces(16.0), 0.005, 0.0, 1.0));
    EXPECT_FALSE(c.kernel_concentration.pass);
    EXPECT_GT(c.kernel_concentration.ratio, 1.0);
}

TEST(Report, JsonCarriesFields) {
    const auto j = to_json(make_report(64, 16.0, trace_powers(Observable::magnetization(4)), 0.005, 1e-3, 1.0));
    EXPECT_DOUBLE_EQ(j.at("trO2").get<double>(), 64.0);
    EXPECT_DOUBLE_EQ(j.at("trO4").get<double>(), 640.0);
    EXPECT_EQ(j.at("L").get<long long>(), 64);
    EXPECT_NEAR(j.at("kbar").get<double>(), 64.0 * 16.0 * 64.0 * 2.0 / 17.0 / 255.0, 1e-12);
}
