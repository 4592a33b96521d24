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

#include "qntk/gradients.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qntk/error.hpp"

namespace qntk {

namespace {

constexpr double kShift = std::numbers::pi / 4.0;

double shifted_residual(const ResidualContext &ctx, AngleVector theta, std::size_t index, double delta) {
    theta[index] += delta;
    return residual(ctx, theta);
}

} // namespace

ResidualContext::ResidualContext(LayeredAnsatz a, StateVector initial, Observable o, double t)
    : ansatz(std::move(a)), psi0(std::move(initial)), observable(std::move(o)), target(t) {
    require_same_qubits(ansatz.n_qubits(), psi0.n_qubits(), "residual context state");
    require_same_qubits(ansatz.n_qubits(), observable.n_qubits(), "residual context observable");
    if (!std::isfinite(target)) {
        throw std::invalid_argument("target must be finite");
    }
}

double GradientVector::squared_norm() const {
    double s = 0.0;
    for (double g : values) {
        s += g * g;
    }
    return s;
}

double residual(const ResidualContext &ctx, const AngleVector &theta) {
    return expectation(ctx.ansatz.evaluate(theta, ctx.psi0), ctx.observable) - ctx.target;
}

double loss(const ResidualContext &ctx, const AngleVector &theta) {
    const double e = residual(ctx, theta);
    return 0.5 * e * e;
}

// With phi = exp(i theta_l X_l)(earlier layers)|psi0> and
// lambda = W_l^dag (later layers)^dag O U|psi0>,
// d eps / d theta_l = 2 Re <lambda| i X_l |phi> = -2 Im <lambda|X_l|phi>.
ResidualGradient residual_and_gradient(const ResidualContext &ctx, const AngleVector &theta) {
    const auto &ansatz = ctx.ansatz;
    StateVector psi = ansatz.evaluate(theta, ctx.psi0);
    StateVector lambda = ctx.observable.apply(psi);
    const Complex raw = psi.inner(lambda);
    ResidualGradient out{raw.real() - ctx.target, {std::vector<double>(ansatz.depth(), 0.0)}};

    for (std::size_t l = ansatz.depth(); l-- > 0;) {
        const auto &layer = ansatz.layer(l);
        const LocalUnitary w_dag = layer.entangler.adjoint();
        apply_local_inplace(psi, w_dag);
        apply_local_inplace(lambda, w_dag);
        const Complex overlap = lambda.inner(apply_pauli(psi, layer.generator));
        out.gradient.values[l] = -2.0 * overlap.imag();
        apply_pauli_rotation_inplace(psi, layer.generator, -theta[l]);
        apply_pauli_rotation_inplace(lambda, layer.generator, -theta[l]);
    }
    return out;
}

GradientVector grad_analytic(const ResidualContext &ctx, const AngleVector &theta) {
    return residual_and_gradient(ctx, theta).gradient;
}

double grad_param_shift(const ResidualContext &ctx, const AngleVector &theta, std::size_t index) {
    ctx.ansatz.check_angles(theta);
    if (index >= theta.size()) {
        throw std::out_of_range("layer index out of range");
    }
    // Every stored generator is a non-identity Pauli string, so its spectrum is {+1, -1}.
    return shifted_residual(ctx, theta, index, kShift) - shifted_residual(ctx, theta, index, -kShift);
}

GradientVector grad_param_shift(const ResidualContext &ctx, const AngleVector &theta) {
    GradientVector g{std::vector<double>(theta.size())};
    for (std::size_t l = 0; l < theta.size(); ++l) {
        g.values[l] = grad_param_shift(ctx, theta, l);
    }
    return g;
}

GradientVector grad_finite_difference(const ResidualContext &ctx, const AngleVector &theta, double step) {
    ctx.ansatz.check_angles(theta);
    GradientVector g{std::vector<double>(theta.size())};
    for (std::size_t l = 0; l < theta.size(); ++l) {
        g.values[l] = (shifted_residual(ctx, theta, l, step) - shifted_residual(ctx, theta, l, -step)) /
                      (2.0 * step);
    }
    return g;
}

double tangent_kernel(const ResidualContext &ctx, const AngleVector &theta) {
    return grad_analytic(ctx, theta).squared_norm();
}

double hessian_entry(const ResidualContext &ctx, const AngleVector &theta, std::size_t a, std::size_t b) {
    ctx.ansatz.check_angles(theta);
    if (a >= theta.size() || b >= theta.size()) {
        throw std::out_of_range("layer index out of range");
    }
    auto eval = [&](double sa, double sb) {
        AngleVector t = theta;
        t[a] += sa;
        t[b] += sb;
        return residual(ctx, t);
    };
    return eval(kShift, kShift) - eval(kShift, -kShift) - eval(-kShift, kShift) + eval(-kShift, -kShift);
}

Eigen::MatrixXd hessian_param_shift(const ResidualContext &ctx, const AngleVector &theta) {
    const std::size_t depth = ctx.depth();
    if (depth > kMaxHessianLayers || ctx.n_qubits() > kMaxHessianQubits) {
        throw ResourceError("Hessian requested for L = " + std::to_string(depth) + ", n = " +
                            std::to_string(ctx.n_qubits()) + "; limits are L <= " +
                            std::to_string(kMaxHessianLayers) + ", n <= " +
                            std::to_string(kMaxHessianQubits));
    }
    const auto n = static_cast<Eigen::Index>(depth);
    Eigen::MatrixXd h(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = a; b < n; ++b) {
            h(a, b) = hessian_entry(ctx, theta, static_cast<std::size_t>(a), static_cast<std::size_t>(b));
            h(b, a) = h(a, b);
        }
    }
    return h;
}

double dqntk_mu(const ResidualContext &ctx, const AngleVector &theta) {
    const Eigen::MatrixXd h = hessian_param_shift(ctx, theta);
    const GradientVector g = grad_analytic(ctx, theta);
    const Eigen::Map<const Eigen::VectorXd> gv(g.values.data(), static_cast<Eigen::Index>(g.size()));
    return gv.dot(h * gv);
}

} // namespace qntk
