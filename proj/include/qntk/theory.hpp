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

#include <json.hpp>

#include "qntk/observable.hpp"

namespace qntk::theory {

/// Averaged QNTK under independent 2-design split circuits:
/// L (N Tr O^2 - Tr^2 O) * 2/(N+1) * 1/(N^2-1). Throws std::invalid_argument for N < 2.
double kbar_exact(double layers, const TracePowers &traces, double dim);
/// Leading large-N form 2 L Tr(O^2) / N^2.
double kbar_large_n(double layers, const TracePowers &traces, double dim);

/// Large-N standard deviation of K: sqrt(L)/N^2 * sqrt(8 Tr^2(O^2) + 12 Tr(O^4)).
double delta_k(double layers, const TracePowers &traces, double dim);
/// delta_k / kbar_large_n, which scales as 1/sqrt(L).
double delta_k_ratio(double layers, const TracePowers &traces, double dim);

/// Large-N standard deviation of the meta-kernel: sqrt(32) L / N^3 * Tr(O^2)^{3/2}.
double delta_mu(double layers, const TracePowers &traces, double dim);

struct DecayPrediction {
    double value;
    bool divergent; ///< |1 - eta K| > 1
};
/// (1 - eta K)^t eps0
DecayPrediction decay_prediction(double eps0, double eta, double kernel, long long t);

struct NoisyPrediction {
    double value;
    bool convergent; ///< 0 < eta K < 2
};
/// Plateau sigma^2 / (eta (2 - eta K)).
NoisyPrediction plateau(double eta, double kernel, double sigma_theta);
/// Noise-averaged eps^2(t) = r^{2t}(eps0^2 - P) + P with r = 1 - eta K and P the plateau.
NoisyPrediction noisy_mean_sq(double eps0, double eta, double kernel, double sigma_theta, double t);
/// Variance of the accumulated noise term, P (1 - r^{2t}).
NoisyPrediction noise_variance(double eta, double kernel, double sigma_theta, double t);
/// Late-time E|eps| for a zero-mean Gaussian residual:
/// sqrt(2/pi) sigma / sqrt(2 eta - eta^2 K).
NoisyPrediction half_normal_mean(double eta, double kernel, double sigma_theta);

struct CrossoverTime {
    double value; ///< +inf when sigma_theta = 0
    bool valid;   ///< 0 < eta K < 1 and sigma_theta >= 0
};
/// Step at which the accumulated noise equals the decaying noiseless residual:
/// log(sigma / sqrt(2 eps0^2 eta - eps0^2 eta^2 K + sigma^2)) / log(1 - eta K).
CrossoverTime t_noise(double eps0, double eta, double kernel, double sigma_theta);

/// Residual at the crossover, 2 (1 - eta K)^{T_noise} eps0
/// = 2 sigma eps0 / sqrt(eps0^2 (2 eta - eta^2 K) + sigma^2).
double crossover_residual(double eps0, double eta, double kernel, double sigma_theta);

/// Predicted log(1/eps_r) = 2 eta L Tr(O^2) T / N^2.
double precision_log_inverse(double eta, double layers, double tr_o2, double dim, double steps);
/// Steps needed for a target relative error eps_r in (0, 1].
double precision_steps(double eta, double layers, double tr_o2, double dim, double eps_r);

struct TheoryReport {
    double kbar = 0.0;
    double kbar_large_n = 0.0;
    double delta_k = 0.0;
    double delta_mu = 0.0;
    double eta = 0.0;
    long long layers = 0;
    double dim = 0.0;
    TracePowers traces;
    double sigma_theta = 0.0;
    double eps0 = 0.0;
};

TheoryReport make_report(long long layers, double dim, const TracePowers &traces, double eta,
                         double sigma_theta, double eps0);

struct ConditionResult {
    bool pass;
    double ratio; ///< raw margin; "much less than one" means ratio <= threshold
};

struct ConcentrationResult {
    ConditionResult kernel_concentration; ///< Delta K / Kbar
    ConditionResult meta_kernel;          ///< eta sqrt(Tr O^2) eps0 / N
    double threshold;
};

inline constexpr double kConcentrationThreshold = 0.1;

ConcentrationResult concentration_check(const TheoryReport &report,
                                        double threshold = kConcentrationThreshold);

nlohmann::json to_json(const TheoryReport &report);
nlohmann::json to_json(const ConcentrationResult &result);

} // namespace qntk::theory
