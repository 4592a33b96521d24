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

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include <json.hpp>

#include "qntk/gradients.hpp"
#include "qntk/rng.hpp"

namespace qntk {

struct TrainConfig {
    double eta = 0.005;
    long long steps = 100;
    double sigma_theta = 0.0; ///< std of the Gaussian angle noise per step, radians
    Seed seed = 0;
    long long record_k_every = 1;
    long long max_steps = 1'000'000;
    bool record_thetas = false;

    /// Throws ConfigError on invalid values.
    void validate() const;
};

struct StepRecord {
    double eps_before = 0.0;
    double eps_after = 0.0;
    double kernel = 0.0;     ///< K at the pre-update angles
    double max_dtheta = 0.0; ///< max_l |eta eps dEps/dtheta_l|, noise excluded
};

struct GdStep {
    AngleVector theta;
    StepRecord record;
};

/// theta_l <- theta_l - eta eps dEps/dtheta_l + N(0, sigma^2). Throws
/// NumericalError if the residual or gradient is not finite.
GdStep gd_step(const ResidualContext &ctx, const AngleVector &theta, const TrainConfig &cfg, Rng &rng);

/// Per-step record of one run. eps/loss/kernel have steps + 1 entries
/// (index t is the state before update t); max_dtheta has `steps` entries.
/// kernel is NaN at steps that were not sampled; the final entry is always set.
struct TrainingTrace {
    std::vector<double> eps;
    std::vector<double> loss;
    std::vector<double> kernel;
    std::vector<double> max_dtheta;
    std::vector<AngleVector> thetas; ///< only with record_thetas
    AngleVector initial_theta;
    AngleVector final_theta;

    long long steps() const { return static_cast<long long>(max_dtheta.size()); }
    double final_kernel() const { return kernel.back(); }
};

TrainingTrace train(const ResidualContext &ctx, const AngleVector &theta0, const TrainConfig &cfg);

/// CSV columns: step,eps,loss,K,max_dtheta. Missing values are written as "nan".
void write_trace_csv(std::ostream &out, const TrainingTrace &trace);
nlohmann::json trace_summary(const TrainingTrace &trace);

struct RunSetup {
    ResidualContext ctx;
    AngleVector theta0;
};

/// Builds the problem for run `index`; `seed` is the run's derived seed.
using RunBuilder = std::function<RunSetup(std::size_t index, Seed seed)>;

struct RunRecord {
    Seed seed = 0;
    double eps0 = 0.0;
    double final_eps = 0.0;
    double initial_kernel = 0.0;
    double final_kernel = 0.0;
    bool filtered = false; ///< excluded by the k_max filter
};

struct EnsembleSummary {
    double mean_abs_final_eps = 0.0;
    double std_final_eps = 0.0; ///< sample standard deviation (n - 1)
    double mean_final_kernel = 0.0;
    std::size_t kept = 0;
    std::size_t filtered = 0;
    std::vector<RunRecord> runs;
    std::vector<TrainingTrace> traces; ///< only when keep_traces
};

struct EnsembleOptions {
    std::size_t n_runs = 10;
    std::size_t jobs = 1;
    std::optional<double> k_max; ///< drop runs whose last-step K exceeds this
    bool keep_traces = false;
};

/// Runs `n_runs` trainings; run i uses noise seed derive_seed(cfg.seed, i).
/// Statistics cover only runs that pass the k_max filter.
EnsembleSummary ensemble_train(const RunBuilder &builder, const TrainConfig &cfg,
                               const EnsembleOptions &options);

struct LazinessReport {
    double max_step_dtheta = 0.0;      ///< max over steps of max_l |delta theta_l|
    double total_displacement = 0.0;   ///< ||theta(T) - theta(0)||_2
    double max_angle_displacement = 0.0;
    double relative_error = 0.0;       ///< |eps(T)| / |eps(0)|
    double dim = 0.0;
};

LazinessReport laziness_report(const TrainingTrace &trace, double dim);
nlohmann::json to_json(const LazinessReport &report);

} // namespace qntk
