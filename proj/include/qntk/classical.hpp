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

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "qntk/rng.hpp"

namespace qntk::classical {

enum class Activation { Tanh, Linear };

double activate(Activation a, double z);
double activate_derivative(Activation a, double z);

/// Multilayer perceptron z^(l+1) = b^(l+1) + W^(l+1) sigma(z^(l)), z^(1) = b^(1) + W^(1) x.
/// weights[l - 1] is W^(l), shaped n_l x n_(l-1); the last layer is linear.
struct Mlp {
    std::vector<int> widths; ///< n_0 ... n_L
    Activation activation = Activation::Tanh;
    double c_w = 1.0;
    double c_b = 0.0;
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;

    /// Zero-initialized network. Throws std::invalid_argument for fewer than
    /// two widths or a non-positive width.
    Mlp(std::vector<int> widths, Activation activation, double c_w = 1.0, double c_b = 0.0);

    /// E[W^2] = C_W / n_(l-1), E[b^2] = C_b, Gaussian.
    static Mlp lecun(std::vector<int> widths, Activation activation, double c_w, double c_b, Seed seed);

    int depth() const { return static_cast<int>(weights.size()); }
    int input_dim() const { return widths.front(); }
    int output_dim() const { return widths.back(); }
    Eigen::Index parameter_count() const;
};

/// Preactivations z^(1..L) for a batch stored column-wise (n_0 x batch).
std::vector<Eigen::MatrixXd> forward(const Mlp &mlp, const Eigen::MatrixXd &inputs);

/// d z^(L) / d z^(layer) for one sample, shaped n_L x n_layer; 1 <= layer <= L.
Eigen::MatrixXd output_gradient(const Mlp &mlp, const Eigen::VectorXd &input, int layer);

/// H_{(i1,a1),(i2,a2)} = sum_mu dz_{i1;a1}/dtheta_mu dz_{i2;a2}/dtheta_mu over all
/// weights and biases. Row/column index is sample * n_L + output.
struct NtkMatrix {
    Eigen::MatrixXd h;
    int outputs = 0;
    int samples = 0;
};

NtkMatrix ntk(const Mlp &mlp, const Eigen::MatrixXd &inputs);

/// Exact E[(dz^(L)_i / dz^(l)_j)^2] for a linear network: C_W^(L-l) / n_l.
double linear_gradient_variance(const Mlp &mlp, int layer);

struct WidthPoint {
    int width = 0;
    double mean_entry = 0.0;    ///< average of d z^(L)_0 / d z^(l)_0
    double mean_entry_se = 0.0;
    double value = 0.0;         ///< estimated second moment (or NTK fluctuation ratio)
    double value_se = 0.0;
};

struct ScalingFit {
    std::vector<WidthPoint> points;
    double slope = 0.0; ///< least-squares slope of log(value) vs log(width)
    double intercept = 0.0;
};

/// Least-squares fit of log(y) against log(x).
ScalingFit fit_log_log(std::vector<WidthPoint> points);

struct GradVarianceConfig {
    std::vector<int> widths{64, 128, 256, 512};
    int depth = 3;     ///< number of weight layers L
    int layer = 1;     ///< l in d z^(L) / d z^(l)
    int input_dim = 8;
    int trials = 200;
    Activation activation = Activation::Linear;
    double c_w = 1.0;
    double c_b = 0.0;
    Seed seed = 0;
    std::size_t jobs = 1;
};

/// Monte Carlo E[(dz^(L)/dz^(l))^2] per width (averaged over all matrix
/// entries of each trial) and its log-log slope. Throws std::invalid_argument
/// for fewer than 100 trials.
ScalingFit grad_variance_experiment(const GradVarianceConfig &config);

struct NtkFluctuationConfig {
    std::vector<int> widths{64, 128, 256, 512, 1024};
    int hidden_layers = 2;
    int input_dim = 4;
    int samples = 4;
    int trials = 100;
    Activation activation = Activation::Tanh;
    double c_w = 1.0;
    double c_b = 0.0;
    Seed seed = 0;
    std::size_t jobs = 1;
};

/// Relative NTK fluctuation sqrt(E||H - Hbar||_F^2) / ||Hbar||_F per width
/// over random initializations on a fixed dataset, plus its log-log slope.
ScalingFit ntk_fluctuation_experiment(const NtkFluctuationConfig &config);

struct TrainOptions {
    double eta = 0.0;
    long long steps = 0;
    long long ntk_every = 0; ///< 0: NTK only at the start and the end
    double divergence_loss = 1e6;
};

struct ClassicalTrace {
    ClassicalTrace(NtkMatrix initial, Mlp network)
        : initial_ntk(std::move(initial)), final_network(std::move(network)) {}

    std::vector<Eigen::VectorXd> residuals; ///< eps(t) flattened like NTK rows, steps + 1 entries
    std::vector<double> loss;
    std::vector<double> ntk_norm;           ///< ||H(t)||_F, NaN where not sampled
    std::vector<double> max_dparam;         ///< steps entries
    NtkMatrix initial_ntk;
    double ntk_drift = 0.0;                 ///< ||H(T) - H(0)||_F / ||H(0)||_F
    double weight_displacement = 0.0;       ///< ||W(T) - W(0)|| / ||W(0)|| over all weights
    bool diverged = false;
    Mlp final_network;
};

/// Full-batch gradient descent on L = 1/2 sum eps^2 with eps = z^(L)(x) - y.
/// Stops early and sets `diverged` once the loss exceeds divergence_loss.
ClassicalTrace ntk_train(Mlp mlp, const Eigen::MatrixXd &inputs, const Eigen::MatrixXd &targets,
                         const TrainOptions &options);

struct ModeDecay {
    double eigenvalue = 0.0;
    double predicted_rate = 0.0; ///< eta * lambda
    double measured_rate = 0.0;  ///< 1 - (c(w)/c(0))^(1/w)
    double initial_weight = 0.0; ///< |c(0)|
};

/// Projects the residual trajectory on eigenvectors of the initial NTK and
/// compares per-mode decay over the first `window` steps with 1 - eta lambda.
std::vector<ModeDecay> mode_decay(const ClassicalTrace &trace, double eta, int window);

/// CSV columns step,eps,loss,K,max_dtheta with eps = ||eps(t)||_2 and K = ||H(t)||_F.
void write_trace_csv(std::ostream &out, const ClassicalTrace &trace);

nlohmann::json to_json(const ScalingFit &fit);

} // namespace qntk::classical
