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

#include "qntk/theory.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace qntk::theory {

double kbar_exact(double layers, const TracePowers &traces, double dim) {
    if (dim < 2.0) {
        throw std::invalid_argument("kbar_exact needs N >= 2");
    }
    const double n = dim;
    return layers * (n * traces.tr2 - traces.tr1 * traces.tr1) * (2.0 / (n + 1.0)) / (n * n - 1.0);
}

double kbar_large_n(double layers, const TracePowers &traces, double dim) {
    return 2.0 * layers * traces.tr2 / (dim * dim);
}

double delta_k(double layers, const TracePowers &traces, double dim) {
    return std::sqrt(layers) / (dim * dim) *
           std::sqrt(8.0 * traces.tr2 * traces.tr2 + 12.0 * traces.tr4);
}

double delta_k_ratio(double layers, const TracePowers &traces, double dim) {
    return delta_k(layers, traces, dim) / kbar_large_n(layers, traces, dim);
}

double delta_mu(double layers, const TracePowers &traces, double dim) {
    return std::sqrt(32.0) * layers / (dim * dim * dim) * std::pow(traces.tr2, 1.5);
}

DecayPrediction decay_prediction(double eps0, double eta, double kernel, long long t) {
    if (t < 0) {
        throw std::invalid_argument("decay_prediction needs t >= 0");
    }
    const double rate = 1.0 - eta * kernel;
    return {std::pow(rate, static_cast<double>(t)) * eps0, std::abs(rate) > 1.0};
}

namespace {

bool in_stable_window(double eta, double kernel) {
    const double x = eta * kernel;
    return x > 0.0 && x < 2.0;
}

} // namespace

NoisyPrediction plateau(double eta, double kernel, double sigma_theta) {
    return {sigma_theta * sigma_theta / (eta * (2.0 - eta * kernel)), in_stable_window(eta, kernel)};
}

NoisyPrediction noisy_mean_sq(double eps0, double eta, double kernel, double sigma_theta, double t) {
    const double p = sigma_theta * sigma_theta / (eta * (2.0 - eta * kernel));
    const double r2t = std::pow(1.0 - eta * kernel, 2.0 * t);
    return {r2t * (eps0 * eps0 - p) + p, in_stable_window(eta, kernel)};
}

NoisyPrediction noise_variance(double eta, double kernel, double sigma_theta, double t) {
    const double p = sigma_theta * sigma_theta / (eta * (2.0 - eta * kernel));
    return {p * (1.0 - std::pow(1.0 - eta * kernel, 2.0 * t)), in_stable_window(eta, kernel)};
}

NoisyPrediction half_normal_mean(double eta, double kernel, double sigma_theta) {
    return {std::sqrt(2.0 / std::numbers::pi) * sigma_theta / std::sqrt(2.0 * eta - eta * eta * kernel),
            in_stable_window(eta, kernel)};
}

CrossoverTime t_noise(double eps0, double eta, double kernel, double sigma_theta) {
    const double x = eta * kernel;
    const bool valid = x > 0.0 && x < 1.0 && sigma_theta >= 0.0;
    if (sigma_theta == 0.0) {
        return {std::numeric_limits<double>::infinity(), valid};
    }
    const double e2 = eps0 * eps0;
    const double denom = std::sqrt(2.0 * e2 * eta - e2 * eta * eta * kernel + sigma_theta * sigma_theta);
    return {std::log(sigma_theta / denom) / std::log(1.0 - x), valid};
}

double crossover_residual(double eps0, double eta, double kernel, double sigma_theta) {
    const double e2 = eps0 * eps0;
    return 2.0 * sigma_theta * std::abs(eps0) / std::sqrt(e2 * (2.0 * eta - eta * eta * kernel) + sigma_theta * sigma_theta);
}

double precision_log_inverse(double eta, double layers, double tr_o2, double dim, double steps) {
    return 2.0 * eta * layers * tr_o2 * steps / (dim * dim);
}

double precision_steps(double eta, double layers, double tr_o2, double dim, double eps_r) {
    if (!(eps_r > 0.0 && eps_r <= 1.0)) {
        throw std::invalid_argument("relative error must lie in (0, 1]");
    }
    return std::log(1.0 / eps_r) * dim * dim / (2.0 * eta * layers * tr_o2);
}

TheoryReport make_report(long long layers, double dim, const TracePowers &traces, double eta,
                         double sigma_theta, double eps0) {
    TheoryReport r;
    r.layers = layers;
    r.dim = dim;
    r.traces = traces;
    r.eta = eta;
    r.sigma_theta = sigma_theta;
    r.eps0 = eps0;
    const auto l = static_cast<double>(layers);
    r.kbar = kbar_exact(l, traces, dim);
    r.kbar_large_n = kbar_large_n(l, traces, dim);
    r.delta_k = delta_k(l, traces, dim);
    r.delta_mu = delta_mu(l, traces, dim);
    return r;
}

ConcentrationResult concentration_check(const TheoryReport &report, double threshold) {
    const double k_ratio = report.kbar_large_n > 0.0 ? report.delta_k / report.kbar_large_n
                                                     : std::numeric_limits<double>::infinity();
    const double mu_ratio = report.eta * std::sqrt(report.traces.tr2) / report.dim * std::abs(report.eps0);
    return {{k_ratio <= threshold, k_ratio}, {mu_ratio <= threshold, mu_ratio}, threshold};
}

nlohmann::json to_json(const TheoryReport &r) {
    return {{"kbar", r.kbar},
            {"kbar_large_n", r.kbar_large_n},
            {"delta_k", r.delta_k},
            {"delta_k_ratio", r.kbar_large_n > 0.0 ? r.delta_k / r.kbar_large_n : 0.0},
            {"delta_mu", r.delta_mu},
            {"eta", r.eta},
            {"L", r.layers},
            {"N", r.dim},
            {"trO", r.traces.tr1},
            {"trO2", r.traces.tr2},
            {"trO4", r.traces.tr4},
            {"sigma_theta", r.sigma_theta},
            {"eps0", r.eps0}};
}

nlohmann::json to_json(const ConcentrationResult &c) {
    return {{"threshold", c.threshold},
            {"cond1", {{"pass", c.kernel_concentration.pass}, {"ratio", c.kernel_concentration.ratio}}},
            {"cond2", {{"pass", c.meta_kernel.pass}, {"ratio", c.meta_kernel.ratio}}}};
}

} // namespace qntk::theory
