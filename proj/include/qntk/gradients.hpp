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

#pragma once

#include <vector>

#include <Eigen/Dense>

#include "qntk/ansatz.hpp"
#include "qntk/observable.hpp"

namespace qntk {

/// Everything the residual eps(theta) = <psi0|U^dag O U|psi0> - target needs.
struct ResidualContext {
    LayeredAnsatz ansatz;
    StateVector psi0;
    Observable observable;
    double target = 0.0;

    ResidualContext(LayeredAnsatz a, StateVector initial, Observable o, double t);

    int n_qubits() const { return ansatz.n_qubits(); }
    std::size_t depth() const { return ansatz.depth(); }
};

/// d eps / d theta_l for every layer.
struct GradientVector {
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double squared_norm() const;
};

double residual(const ResidualContext &ctx, const AngleVector &theta);
/// eps^2 / 2
double loss(const ResidualContext &ctx, const AngleVector &theta);

/// Residual and exact gradient from one forward pass plus one adjoint sweep.
struct ResidualGradient {
    double residual;
    GradientVector gradient;
};
ResidualGradient residual_and_gradient(const ResidualContext &ctx, const AngleVector &theta);

GradientVector grad_analytic(const ResidualContext &ctx, const AngleVector &theta);

/// eps(theta + pi/4 e_l) - eps(theta - pi/4 e_l) for 0-based layer `index`.
double grad_param_shift(const ResidualContext &ctx, const AngleVector &theta, std::size_t index);
GradientVector grad_param_shift(const ResidualContext &ctx, const AngleVector &theta);

/// Central finite differences with step h.
GradientVector grad_finite_difference(const ResidualContext &ctx, const AngleVector &theta,
                                      double step = 1e-5);

/// K = sum_l (d eps / d theta_l)^2
double tangent_kernel(const ResidualContext &ctx, const AngleVector &theta);

/// Limits for the O(L^2) Hessian path.
inline constexpr std::size_t kMaxHessianLayers = 256;
inline constexpr int kMaxHessianQubits = 6;

/// d^2 eps / d theta_a d theta_b by the double shift rule (0-based indices).
double hessian_entry(const ResidualContext &ctx, const AngleVector &theta, std::size_t a,
                     std::size_t b);
/// Symmetric Hessian of eps. Throws ResourceError beyond the limits above.
Eigen::MatrixXd hessian_param_shift(const ResidualContext &ctx, const AngleVector &theta);

/// mu = sum_{a,b} H_ab g_a g_b
double dqntk_mu(const ResidualContext &ctx, const AngleVector &theta);

} // namespace qntk
