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
#include <algorithm>
#include <functional>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "qntk/classical.hpp"

using namespace qntk;
using namespace qntk::classical;

namespace {

Eigen::MatrixXd gaussian(int rows, int cols, Seed seed) {
    Rng rng(seed);
    Eigen::MatrixXd m(rows, cols);
    for (int c = 0; c < cols; ++c) {
        for (int r = 0; r < rows; ++r) {
            m(r, c) = rng.normal();
        }
    }
    return m;
}

// Reference forward pass written neuron by neuron.
Eigen::VectorXd naive_output(const Mlp &mlp, const Eigen::VectorXd &x) {
    std::vector<double> a(x.data(), x.data() + x.size());
    std::vector<double> z;
    for (int l = 0; l < mlp.depth(); ++l) {
        const auto &w = mlp.weights[static_cast<std::size_t>(l)];
        const auto &b = mlp.biases[static_cast<std::size_t>(l)];
        z.assign(static_cast<std::size_t>(w.rows()), 0.0);
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
            double s = b(i);
            for (Eigen::Index j = 0; j < w.cols(); ++j) {
                s += w(i, j) * a[static_cast<std::size_t>(j)];
            }
            z[static_cast<std::size_t>(i)] = s;
        }
        a.resize(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) {
            a[i] = mlp.activation == Activation::Tanh ? std::tanh(z[i]) : z[i];
        }
    }
    return Eigen::Map<Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(z.size()));
}

// All outputs over the batch, flattened sample-major like the NTK rows.
Eigen::VectorXd flat_outputs(const Mlp &mlp, const Eigen::MatrixXd &x) {
    Eigen::VectorXd out(mlp.output_dim() * x.cols());
    for (Eigen::Index a = 0; a < x.cols(); ++a) {
        out.segment(a * mlp.output_dim(), mlp.output_dim()) = naive_output(mlp, x.col(a));
    }
    return out;
}

// Central-difference Jacobian with respect to every weight and bias.
Eigen::MatrixXd fd_jacobian(Mlp mlp, const Eigen::MatrixXd &x, double h = 1e-6) {
    std::vector<double *> params;
    for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
        for (Eigen::Index i = 0; i < mlp.weights[l].size(); ++i) {
            params.push_back(mlp.weights[l].data() + i);
        }
        for (Eigen::Index i = 0; i < mlp.biases[l].size(); ++i) {
            params.push_back(mlp.biases[l].data() + i);
        }
    }
    Eigen::MatrixXd j(mlp.output_dim() * x.cols(), static_cast<Eigen::Index>(params.size()));
    for (std::size_t p = 0; p < params.size(); ++p) {
        const double keep = *params[p];
        *params[p] = keep + h;
        const Eigen::VectorXd plus = flat_outputs(mlp, x);
        *params[p] = keep - h;
        const Eigen::VectorXd minus = flat_outputs(mlp, x);
        *params[p] = keep;
        j.col(static_cast<Eigen::Index>(p)) = (plus - minus) / (2.0 * h);
    }
    return j;
}

} // namespace

TEST(Mlp, ConstructionAndValidation) {
    Mlp m({3, 5, 2}, Activation::Tanh);
    EXPECT_EQ(m.depth(), 2);
    EXPECT_EQ(m.parameter_count(), 3 * 5 + 5 + 5 * 2 + 2);
    EXPECT_EQ(m.weights[0].rows(), 5);
    EXPECT_EQ(m.weights[0].cols(), 3);
    EXPECT_THROW(Mlp({3}, Activation::Tanh), std::invalid_argument);
    EXPECT_THROW(Mlp({3, 0, 1}, Activation::Tanh), std::invalid_argument);
    EXPECT_THROW(Mlp({3, 1}, Activation::Tanh, -1.0), std::invalid_argument);
}

TEST(Forward, ZeroWeightsGiveBiases) {
    Mlp m({3, 4, 2}, Activation::Tanh);
    m.biases[1] << 0.25, -1.5;
    const auto z = forward(m, gaussian(3, 5, 1));
    for (int a = 0; a < 5; ++a) {
        EXPECT_DOUBLE_EQ(z.back()(0, a), 0.25);
        EXPECT_DOUBLE_EQ(z.back()(1, a), -1.5);
    }
}

TEST(Forward, SingleLayerIsAffine) {
    const Mlp m = Mlp::lecun({4, 3}, Activation::Tanh, 1.0, 0.5, 2);
    const Eigen::MatrixXd x = gaussian(4, 6, 3);
    const auto z = forward(m, x);
    ASSERT_EQ(z.size(), 1u);
    Eigen::MatrixXd expected = m.weights[0] * x;
    expected.colwise() += m.biases[0];
    EXPECT_LT((z[0] - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Forward, MatchesNeuronLoop) {
    for (auto act : {Activation::Tanh, Activation::Linear}) {
        const Mlp m = Mlp::lecun({4, 7, 6, 3}, act, 1.5, 0.1, 4);
        const Eigen::MatrixXd x = gaussian(4, 5, 5);
        const auto z = forward(m, x);
        for (int a = 0; a < 5; ++a) {
            EXPECT_LT((z.back().col(a) - naive_output(m, x.col(a))).cwiseAbs().maxCoeff(), 1e-13);
        }
    }
    EXPECT_THROW(forward(Mlp({4, 2}, Activation::Tanh), gaussian(3, 1, 0)), std::invalid_argument);
}

TEST(OutputGradient, LastLayerIsIdentityAndLinearIsWeight) {
    const Mlp m = Mlp::lecun({3, 4, 2}, Activation::Linear, 1.0, 0.0, 6);
    const Eigen::VectorXd x = gaussian(3, 1, 7);
    EXPECT_TRUE(output_gradient(m, x, 2).isApprox(Eigen::MatrixXd::Identity(2, 2)));
    EXPECT_LT((output_gradient(m, x, 1) - m.weights[1]).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_THROW(output_gradient(m, x, 0), std::out_of_range);
    EXPECT_THROW(output_gradient(m, x, 3), std::out_of_range);
}

TEST(OutputGradient, MatchesFiniteDifferences) {
    const Mlp m = Mlp::lecun({3, 5, 4, 2}, Activation::Tanh, 1.2, 0.1, 8);
    const Eigen::VectorXd x = gaussian(3, 1, 9);
    const auto z = forward(m, x);
    // Perturb z^(1) and push it through the remaining layers.
    auto tail = [&](const Eigen::VectorXd &z1) {
        Eigen::VectorXd a = z1.array().tanh();
        Eigen::VectorXd z2 = m.weights[1] * a + m.biases[1];
        Eigen::VectorXd a2 = z2.array().tanh();
        return Eigen::VectorXd(m.weights[2] * a2 + m.biases[2]);
    };
    const Eigen::VectorXd z1 = z[0].col(0);
    Eigen::MatrixXd fd(2, 5);
    const double h = 1e-6;
    for (int j = 0; j < 5; ++j) {
        Eigen::VectorXd p = z1, q = z1;
        p(j) += h;
        q(j) -= h;
        fd.col(j) = (tail(p) - tail(q)) / (2 * h);
    }
    EXPECT_LT((output_gradient(m, x, 1) - fd).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Lecun, EmpiricalVariances) {
    const Mlp m = Mlp::lecun({400, 300, 1}, Activation::Tanh, 2.0, 0.3, 10);
    const double n = static_cast<double>(m.weights[0].size());
    const double w_var = m.weights[0].squaredNorm() / n;
    EXPECT_NEAR(w_var / (2.0 / 400.0), 1.0, 4.0 * std::sqrt(2.0 / n));
    EXPECT_NEAR(m.weights[0].mean(), 0.0, 4.0 * std::sqrt(2.0 / 400.0 / n));
    const double b_var = m.biases[0].squaredNorm() / 300.0;
    EXPECT_NEAR(b_var / 0.3, 1.0, 4.0 * std::sqrt(2.0 / 300.0));
    EXPECT_TRUE(Mlp::lecun({4, 3}, Activation::Tanh, 1.0, 0.0, 1).weights[0].isApprox(
        Mlp::lecun({4, 3}, Activation::Tanh, 1.0, 0.0, 1).weights[0]));
}

TEST(Ntk, SymmetricPositiveSemidefinite) {
    const Mlp m = Mlp::lecun({3, 16, 16, 2}, Activation::Tanh, 1.0, 0.1, 11);
    const auto k = ntk(m, gaussian(3, 5, 12));
    ASSERT_EQ(k.h.rows(), 10);
    EXPECT_EQ(k.outputs, 2);
    EXPECT_EQ(k.samples, 5);
    EXPECT_LT((k.h - k.h.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k.h);
    EXPECT_GT(es.eigenvalues().minCoeff(), -1e-10 * es.eigenvalues().maxCoeff());
}

TEST(Ntk, MatchesJacobianGram) {
    for (auto act : {Activation::Tanh, Activation::Linear}) {
        const Mlp m = Mlp::lecun({3, 6, 5, 2}, act, 1.0, 0.2, 13);
        const Eigen::MatrixXd x = gaussian(3, 4, 14);
        const Eigen::MatrixXd j = fd_jacobian(m, x);
        const Eigen::MatrixXd expected = j * j.transpose();
        const auto k = ntk(m, x);
        EXPECT_LT((k.h - expected).cwiseAbs().maxCoeff(), 1e-7 * expected.cwiseAbs().maxCoeff());
    }
}

TEST(LinearVariance, ClosedForm) {
    const Mlp m = Mlp::lecun({5, 32, 48, 16}, Activation::Linear, 1.5, 0.0, 0);
    EXPECT_DOUBLE_EQ(linear_gradient_variance(m, 2), 1.5 / 48.0);
    EXPECT_DOUBLE_EQ(linear_gradient_variance(m, 1), 1.5 * 1.5 / 32.0);
    EXPECT_DOUBLE_EQ(linear_gradient_variance(m, 3), 1.0 / 16.0);
    EXPECT_THROW(linear_gradient_variance(m, 0), std::out_of_range);
}

TEST(GradVariance, MonteCarloMatchesClosedForm) {
    GradVarianceConfig cfg;
    cfg.widths = {32, 128};
    cfg.depth = 2;
    cfg.trials = 200;
    cfg.c_w = 1.3;
    cfg.jobs = 4;
    const auto fit = grad_variance_experiment(cfg);
    for (const auto &p : fit.points) {
        const double expected = cfg.c_w / p.width;
        EXPECT_NEAR(p.value, expected, 4.0 * p.value_se) << p.width;
        EXPECT_LE(std::abs(p.mean_entry), 4.0 * p.mean_entry_se + 1e-12);
    }
    EXPECT_NEAR(fit.slope, -1.0, 0.1);
}

TEST(GradVariance, RejectsFewTrials) {
    GradVarianceConfig cfg;
    cfg.trials = 99;
    EXPECT_THROW(grad_variance_experiment(cfg), std::invalid_argument);
}

TEST(FitLogLog, RecoversPowerLaw) {
    std::vector<WidthPoint> pts;
    for (int w : {10, 20, 40, 80}) {
        pts.push_back({w, 0.0, 0.0, 3.0 * std::pow(w, -0.7), 0.0});
    }
    const auto fit = fit_log_log(pts);
    EXPECT_NEAR(fit.slope, -0.7, 1e-12);
    EXPECT_NEAR(std::exp(fit.intercept), 3.0, 1e-12);
    EXPECT_EQ(to_json(fit).at("points").size(), 4u);
}

TEST(NtkTrain, ZeroRateKeepsResidual) {
    const Mlp m = Mlp::lecun({3, 8, 1}, Activation::Tanh, 1.0, 0.0, 15);
    const auto tr = ntk_train(m, gaussian(3, 4, 16), gaussian(1, 4, 17), {0.0, 5, 0, 1e6});
    ASSERT_EQ(tr.residuals.size(), 6u);
    for (const auto &r : tr.residuals) {
        EXPECT_EQ(r, tr.residuals.front());
    }
    EXPECT_EQ(tr.ntk_drift, 0.0);
    EXPECT_EQ(tr.weight_displacement, 0.0);
}

TEST(NtkTrain, AffineModelFollowsLinearRecursionExactly) {
    const Mlp m = Mlp::lecun({3, 2}, Activation::Linear, 1.0, 0.0, 18);
    const Eigen::MatrixXd x = gaussian(3, 3, 19);
    const Eigen::MatrixXd y = gaussian(2, 3, 20);
    const auto h = ntk(m, x).h;
    const double eta = 0.5 / Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h).eigenvalues().maxCoeff();
    const auto tr = ntk_train(m, x, y, {eta, 30, 0, 1e6});
    const Eigen::MatrixXd step = Eigen::MatrixXd::Identity(h.rows(), h.cols()) - eta * h;
    Eigen::VectorXd e = tr.residuals.front();
    for (std::size_t t = 1; t < tr.residuals.size(); ++t) {
        e = step * e;
        EXPECT_LT((tr.residuals[t] - e).cwiseAbs().maxCoeff(), 1e-12) << t;
    }
    EXPECT_LT(tr.ntk_drift, 1e-14);
    for (const auto &mode : mode_decay(tr, eta, 10)) {
        if (mode.initial_weight > 1e-8) {
            EXPECT_NEAR(mode.measured_rate, mode.predicted_rate, 1e-9);
        }
    }
}

TEST(NtkTrain, FlagsDivergence) {
    const Mlp m = Mlp::lecun({3, 2}, Activation::Linear, 1.0, 0.0, 21);
    const Eigen::MatrixXd x = gaussian(3, 3, 22);
    const auto h = ntk(m, x).h;
    const double eta = 3.0 / Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h).eigenvalues().maxCoeff();
    const auto tr = ntk_train(m, x, gaussian(2, 3, 23), {eta, 500, 0, 1e6});
    EXPECT_TRUE(tr.diverged);
    EXPECT_LT(tr.residuals.size(), 501u);
}

TEST(NtkTrain, RejectsBadShapes) {
    const Mlp m({3, 2}, Activation::Linear);
    EXPECT_THROW(ntk_train(m, gaussian(3, 3, 0), gaussian(1, 3, 0), {0.1, 1, 0, 1e6}), std::invalid_argument);
    EXPECT_THROW(ntk_train(m, gaussian(3, 3, 0), gaussian(2, 3, 0), {-0.1, 1, 0, 1e6}), std::invalid_argument);
}

TEST(NtkTrain, WideNetworksMoveLess) {
    const Eigen::MatrixXd x = gaussian(4, 8, 24);
    const Eigen::MatrixXd y = gaussian(1, 8, 25);
    std::vector<double> drift, disp;
    for (int w : {32, 128, 512}) {
        const Mlp m = Mlp::lecun({4, w, w, 1}, Activation::Tanh, 1.0, 0.0, derive_seed(26, w));
        const double lmax = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(ntk(m, x).h).eigenvalues().maxCoeff();
        const auto tr = ntk_train(m, x, y, {0.5 / lmax, 100, 0, 1e6});
        ASSERT_FALSE(tr.diverged);
        EXPECT_LT(tr.loss.back(), tr.loss.front());
        drift.push_back(tr.ntk_drift);
        disp.push_back(tr.weight_displacement);
    }
    EXPECT_GT(drift[0], drift[2]);
    EXPECT_GT(disp[0], disp[1]);
    EXPECT_GT(disp[1], disp[2]);
}

TEST(ModeDecay, WindowValidationAndOrdering) {
    const Mlp m = Mlp::lecun({3, 64, 1}, Activation::Tanh, 1.0, 0.0, 27);
    const Eigen::MatrixXd x = gaussian(3, 5, 28);
    const auto tr = ntk_train(m, x, gaussian(1, 5, 29), {0.01, 10, 0, 1e6});
    EXPECT_THROW(mode_decay(tr, 0.01, 0), std::invalid_argument);
    EXPECT_THROW(mode_decay(tr, 0.01, 11), std::invalid_argument);
    const auto modes = mode_decay(tr, 0.01, 5);
    ASSERT_EQ(modes.size(), 5u);
    for (std::size_t i = 1; i < modes.size(); ++i) {
        EXPECT_GE(modes[i - 1].eigenvalue, modes[i].eigenvalue);
    }
}

TEST(ClassicalTraceCsv, Header) {
    const Mlp m = Mlp::lecun({3, 4, 1}, Activation::Tanh, 1.0, 0.0, 30);
    const auto tr = ntk_train(m, gaussian(3, 2, 31), gaussian(1, 2, 32), {0.01, 2, 0, 1e6});
    std::ostringstream out;
    write_trace_csv(out, tr);
    const std::string text = out.str();
    EXPECT_EQ(text.substr(0, text.find('\n')), "step,eps,loss,K,max_dtheta");
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
}
