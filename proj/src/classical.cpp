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

#include "qntk/classical.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "qntk/parallel.hpp"

namespace qntk::classical {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::MatrixXd activate(Activation a, const Eigen::MatrixXd &z) {
    return z.unaryExpr([a](double v) { return classical::activate(a, v); });
}

Eigen::MatrixXd activate_derivative(Activation a, const Eigen::MatrixXd &z) {
    return z.unaryExpr([a](double v) { return classical::activate_derivative(a, v); });
}

Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, double stddev, Rng &rng) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
        for (Eigen::Index r = 0; r < rows; ++r) {
            m(r, c) = stddev * rng.normal();
        }
    }
    return m;
}

struct MeanSe {
    double mean;
    double se;
};

MeanSe mean_se(const std::vector<double> &xs) {
    const auto n = static_cast<double>(xs.size());
    double s = 0.0;
    for (double x : xs) {
        s += x;
    }
    const double mean = s / n;
    double ss = 0.0;
    for (double x : xs) {
        ss += (x - mean) * (x - mean);
    }
    return {mean, xs.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0};
}

std::vector<int> equal_widths(int input_dim, int width, int weight_layers, int output_dim) {
    std::vector<int> w{input_dim};
    for (int l = 1; l < weight_layers; ++l) {
        w.push_back(width);
    }
    w.push_back(output_dim);
    return w;
}

double weights_norm(const Mlp &mlp) {
    double ss = 0.0;
    for (const auto &w : mlp.weights) {
        ss += w.squaredNorm();
    }
    return std::sqrt(ss);
}

} // namespace

double activate(Activation a, double z) { return a == Activation::Tanh ? std::tanh(z) : z; }

double activate_derivative(Activation a, double z) {
    if (a == Activation::Linear) {
        return 1.0;
    }
    const double t = std::tanh(z);
    return 1.0 - t * t;
}

Mlp::Mlp(std::vector<int> w, Activation act, double cw, double cb)
    : widths(std::move(w)), activation(act), c_w(cw), c_b(cb) {
    if (widths.size() < 2) {
        throw std::invalid_argument("an MLP needs at least input and output widths");
    }
    for (int n : widths) {
        if (n < 1) {
            throw std::invalid_argument("MLP widths must be positive");
        }
    }
    if (c_w < 0.0 || c_b < 0.0) {
        throw std::invalid_argument("initialization variances must be >= 0");
    }
    for (std::size_t l = 1; l < widths.size(); ++l) {
        weights.push_back(Eigen::MatrixXd::Zero(widths[l], widths[l - 1]));
        biases.push_back(Eigen::VectorXd::Zero(widths[l]));
    }
}

Mlp Mlp::lecun(std::vector<int> widths, Activation activation, double c_w, double c_b, Seed seed) {
    Mlp mlp(std::move(widths), activation, c_w, c_b);
    Rng rng(seed);
    for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
        auto &w = mlp.weights[l];
        w = gaussian_matrix(w.rows(), w.cols(), std::sqrt(c_w / static_cast<double>(w.cols())), rng);
        mlp.biases[l] = gaussian_matrix(w.rows(), 1, std::sqrt(c_b), rng);
    }
    return mlp;
}

Eigen::Index Mlp::parameter_count() const {
    Eigen::Index n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        n += weights[l].size() + biases[l].size();
    }
    return n;
}

std::vector<Eigen::MatrixXd> forward(const Mlp &mlp, const Eigen::MatrixXd &inputs) {
    if (inputs.rows() != mlp.input_dim()) {
        throw std::invalid_argument("input dimension " + std::to_string(inputs.rows()) +
                                    " does not match n_0 = " + std::to_string(mlp.input_dim()));
    }
    std::vector<Eigen::MatrixXd> z;
    z.reserve(mlp.weights.size());
    for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
        Eigen::MatrixXd pre =
            l == 0 ? Eigen::MatrixXd(mlp.weights[0] * inputs) : Eigen::MatrixXd(mlp.weights[l] * activate(mlp.activation, z.back()));
        pre.colwise() += mlp.biases[l];
        z.push_back(std::move(pre));
    }
    return z;
}

Eigen::MatrixXd output_gradient(const Mlp &mlp, const Eigen::VectorXd &input, int layer) {
    if (layer < 1 || layer > mlp.depth()) {
        throw std::out_of_range("layer index outside [1, L]");
    }
    const auto z = forward(mlp, input);
    Eigen::MatrixXd j = Eigen::MatrixXd::Identity(mlp.output_dim(), mlp.output_dim());
    // dz^(L)/dz^(l) = dz^(L)/dz^(l+1) W^(l+1) diag(sigma'(z^(l)))
    for (int l = mlp.depth() - 1; l >= layer; --l) {
        const Eigen::VectorXd d = activate_derivative(mlp.activation, z[static_cast<std::size_t>(l - 1)]);
        j = (j * mlp.weights[static_cast<std::size_t>(l)]) * d.asDiagonal();
    }
    return j;
}

NtkMatrix ntk(const Mlp &mlp, const Eigen::MatrixXd &inputs) {
    const auto z = forward(mlp, inputs);
    const int outputs = mlp.output_dim();
    const auto samples = static_cast<int>(inputs.cols());
    const int depth = mlp.depth();

    // jac[l][a]: dz^(L)/dz^(l+1) for sample a; act[l]: inputs of weight layer l.
    std::vector<std::vector<Eigen::MatrixXd>> jac(static_cast<std::size_t>(depth),
                                                  std::vector<Eigen::MatrixXd>(static_cast<std::size_t>(samples)));
    for (int a = 0; a < samples; ++a) {
        Eigen::MatrixXd j = Eigen::MatrixXd::Identity(outputs, outputs);
        jac[static_cast<std::size_t>(depth - 1)][static_cast<std::size_t>(a)] = j;
        for (int l = depth - 1; l >= 1; --l) {
            const Eigen::VectorXd d =
                activate_derivative(mlp.activation, Eigen::MatrixXd(z[static_cast<std::size_t>(l - 1)].col(a)));
            j = (j * mlp.weights[static_cast<std::size_t>(l)]) * d.asDiagonal();
            jac[static_cast<std::size_t>(l - 1)][static_cast<std::size_t>(a)] = j;
        }
    }
    std::vector<Eigen::MatrixXd> act;
    act.push_back(inputs);
    for (int l = 1; l < depth; ++l) {
        act.push_back(activate(mlp.activation, z[static_cast<std::size_t>(l - 1)]));
    }

    NtkMatrix out{Eigen::MatrixXd::Zero(outputs * samples, outputs * samples), outputs, samples};
    for (int l = 0; l < depth; ++l) {
        const Eigen::MatrixXd gram = act[static_cast<std::size_t>(l)].transpose() * act[static_cast<std::size_t>(l)];
        for (int a1 = 0; a1 < samples; ++a1) {
            for (int a2 = a1; a2 < samples; ++a2) {
                const Eigen::MatrixXd block = (1.0 + gram(a1, a2)) *
                                              (jac[static_cast<std::size_t>(l)][static_cast<std::size_t>(a1)] *
                                               jac[static_cast<std::size_t>(l)][static_cast<std::size_t>(a2)].transpose());
                out.h.block(a1 * outputs, a2 * outputs, outputs, outputs) += block;
                if (a2 != a1) {
                    out.h.block(a2 * outputs, a1 * outputs, outputs, outputs) += block.transpose();
                }
            }
        }
    }
    return out;
}

double linear_gradient_variance(const Mlp &mlp, int layer) {
    if (layer < 1 || layer > mlp.depth()) {
        throw std::out_of_range("layer index outside [1, L]");
    }
    if (layer == mlp.depth()) {
        return 1.0 / mlp.output_dim(); // identity matrix: mean squared entry
    }
    return std::pow(mlp.c_w, mlp.depth() - layer) / mlp.widths[static_cast<std::size_t>(layer)];
}

ScalingFit fit_log_log(std::vector<WidthPoint> points) {
    ScalingFit fit;
    const auto n = static_cast<double>(points.size());
    double sx = 0.0;
    double sy = 0.0;
    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto &p : points) {
        const double x = std::log(static_cast<double>(p.width));
        const double y = std::log(p.value);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / n;
    fit.points = std::move(points);
    return fit;
}

ScalingFit grad_variance_experiment(const GradVarianceConfig &config) {
    if (config.trials < 100) {
        throw std::invalid_argument("grad_variance_experiment needs at least 100 trials per width");
    }
    if (config.widths.size() < 2) {
        throw std::invalid_argument("need at least two widths to fit a slope");
    }
    std::vector<WidthPoint> points;
    for (std::size_t wi = 0; wi < config.widths.size(); ++wi) {
        const int width = config.widths[wi];
        const auto trials = static_cast<std::size_t>(config.trials);
        std::vector<double> entries(trials);
        std::vector<double> squares(trials);
        parallel_for(trials, config.jobs, [&](std::size_t t) {
            const Seed seed = derive_seed(config.seed, wi * 1'000'003ULL + t);
            const Mlp mlp = Mlp::lecun(equal_widths(config.input_dim, width, config.depth, width),
                                       config.activation, config.c_w, config.c_b, seed);
            Rng rng(derive_seed(seed, 1));
            Eigen::VectorXd x(config.input_dim);
            for (auto &v : x) {
                v = rng.normal();
            }
            const Eigen::MatrixXd j = output_gradient(mlp, x, config.layer);
            entries[t] = j(0, 0);
            squares[t] = j.squaredNorm() / static_cast<double>(j.size());
        });
        const MeanSe e = mean_se(entries);
        const MeanSe s = mean_se(squares);
        points.push_back({width, e.mean, e.se, s.mean, s.se});
    }
    return fit_log_log(std::move(points));
}

ScalingFit ntk_fluctuation_experiment(const NtkFluctuationConfig &config) {
    if (config.trials < 2 || config.widths.size() < 2) {
        throw std::invalid_argument("ntk_fluctuation_experiment needs >= 2 trials and >= 2 widths");
    }
    Rng data_rng(derive_seed(config.seed, 0xDA7AULL));
    const Eigen::MatrixXd inputs = gaussian_matrix(config.input_dim, config.samples, 1.0, data_rng);

    std::vector<WidthPoint> points;
    for (std::size_t wi = 0; wi < config.widths.size(); ++wi) {
        const int width = config.widths[wi];
        const auto trials = static_cast<std::size_t>(config.trials);
        std::vector<Eigen::MatrixXd> hs(trials);
        parallel_for(trials, config.jobs, [&](std::size_t t) {
            const Seed seed = derive_seed(config.seed, (wi + 1) * 1'000'003ULL + t);
            const Mlp mlp = Mlp::lecun(equal_widths(config.input_dim, width, config.hidden_layers + 1, 1),
                                       config.activation, config.c_w, config.c_b, seed);
            hs[t] = ntk(mlp, inputs).h;
        });
        Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(hs[0].rows(), hs[0].cols());
        for (const auto &h : hs) {
            mean += h;
        }
        mean /= static_cast<double>(trials);
        double ss = 0.0;
        for (const auto &h : hs) {
            ss += (h - mean).squaredNorm();
        }
        const double fluct = std::sqrt(ss / static_cast<double>(trials - 1));
        points.push_back({width, 0.0, 0.0, fluct / mean.norm(), 0.0});
    }
    return fit_log_log(std::move(points));
}

ClassicalTrace ntk_train(Mlp mlp, const Eigen::MatrixXd &inputs, const Eigen::MatrixXd &targets,
                         const TrainOptions &options) {
    if (targets.rows() != mlp.output_dim() || targets.cols() != inputs.cols()) {
        throw std::invalid_argument("targets must be n_L x samples");
    }
    if (options.steps < 0 || options.eta < 0.0) {
        throw std::invalid_argument("ntk_train needs steps >= 0 and eta >= 0");
    }
    ClassicalTrace trace(ntk(mlp, inputs), mlp);
    const Mlp initial = mlp;
    const double h0_norm = trace.initial_ntk.h.norm();
    const int depth = mlp.depth();

    for (long long t = 0;; ++t) {
        const auto z = forward(mlp, inputs);
        const Eigen::MatrixXd eps = z.back() - targets;
        trace.residuals.emplace_back(Eigen::Map<const Eigen::VectorXd>(eps.data(), eps.size()));
        const double loss = 0.5 * eps.squaredNorm();
        trace.loss.push_back(loss);
        const bool sample = t == 0 || (options.ntk_every > 0 && t % options.ntk_every == 0);
        trace.ntk_norm.push_back(t == 0 ? h0_norm : (sample ? ntk(mlp, inputs).h.norm() : kNaN));
        if (!std::isfinite(loss) || loss > options.divergence_loss) {
            trace.diverged = true;
            break;
        }
        if (t == options.steps) {
            break;
        }
        std::vector<Eigen::MatrixXd> grad_w(static_cast<std::size_t>(depth));
        std::vector<Eigen::VectorXd> grad_b(static_cast<std::size_t>(depth));
        Eigen::MatrixXd delta = eps;
        for (int l = depth - 1; l >= 0; --l) {
            const auto ul = static_cast<std::size_t>(l);
            const Eigen::MatrixXd prev = l == 0 ? inputs : activate(mlp.activation, z[ul - 1]);
            grad_w[ul] = delta * prev.transpose();
            grad_b[ul] = delta.rowwise().sum();
            if (l > 0) {
                delta = (mlp.weights[ul].transpose() * delta).cwiseProduct(activate_derivative(mlp.activation, z[ul - 1]));
            }
        }
        double max_step = 0.0;
        for (std::size_t l = 0; l < grad_w.size(); ++l) {
            max_step = std::max({max_step, options.eta * grad_w[l].cwiseAbs().maxCoeff(),
                                 options.eta * grad_b[l].cwiseAbs().maxCoeff()});
            mlp.weights[l] -= options.eta * grad_w[l];
            mlp.biases[l] -= options.eta * grad_b[l];
        }
        trace.max_dparam.push_back(max_step);
    }
    const NtkMatrix final_ntk = ntk(mlp, inputs);
    trace.ntk_norm.back() = final_ntk.h.norm();
    trace.ntk_drift = (final_ntk.h - trace.initial_ntk.h).norm() / h0_norm;
    double ss = 0.0;
    for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
        ss += (mlp.weights[l] - initial.weights[l]).squaredNorm();
    }
    trace.weight_displacement = std::sqrt(ss) / weights_norm(initial);
    trace.final_network = std::move(mlp);
    return trace;
}

std::vector<ModeDecay> mode_decay(const ClassicalTrace &trace, double eta, int window) {
    if (window < 1 || static_cast<std::size_t>(window) >= trace.residuals.size()) {
        throw std::invalid_argument("decay window must lie inside the trace");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(trace.initial_ntk.h);
    std::vector<ModeDecay> modes;
    const auto &e0 = trace.residuals.front();
    const auto &ew = trace.residuals[static_cast<std::size_t>(window)];
    for (Eigen::Index k = es.eigenvalues().size(); k-- > 0;) {
        const Eigen::VectorXd v = es.eigenvectors().col(k);
        const double c0 = v.dot(e0);
        const double cw = v.dot(ew);
        const double ratio = cw / c0;
        ModeDecay m;
        m.eigenvalue = es.eigenvalues()(k);
        m.predicted_rate = eta * m.eigenvalue;
        m.measured_rate = ratio > 0.0 ? 1.0 - std::pow(ratio, 1.0 / window) : kNaN;
        m.initial_weight = std::abs(c0);
        modes.push_back(m);
    }
    return modes;
}

void write_trace_csv(std::ostream &out, const ClassicalTrace &trace) {
    out << "step,eps,loss,K,max_dtheta\n" << std::setprecision(17);
    auto put = [&out](double v) {
        if (std::isnan(v)) {
            out << "nan";
        } else {
            out << v;
        }
    };
    for (std::size_t t = 0; t < trace.residuals.size(); ++t) {
        out << t << ',';
        put(trace.residuals[t].norm());
        out << ',';
        put(trace.loss[t]);
        out << ',';
        put(trace.ntk_norm[t]);
        out << ',';
        put(t < trace.max_dparam.size() ? trace.max_dparam[t] : kNaN);
        out << '\n';
    }
}

nlohmann::json to_json(const ScalingFit &fit) {
    nlohmann::json points = nlohmann::json::array();
    for (const auto &p : fit.points) {
        points.push_back({{"width", p.width},
                          {"mean_entry", p.mean_entry},
                          {"mean_entry_se", p.mean_entry_se},
                          {"value", p.value},
                          {"value_se", p.value_se}});
    }
    return {{"slope", fit.slope}, {"intercept", fit.intercept}, {"points", std::move(points)}};
}

} // namespace qntk::classical
