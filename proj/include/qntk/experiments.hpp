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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qntk/dynamics.hpp"
#include "qntk/observable.hpp"

namespace qntk::experiments {

enum class Experiment {
    Decay,
    KbarEnsemble,
    ScalingL,
    NoiseSweep,
    LrSweep,
    TNoise,
    ClassicalWidth,
    HaarMoments,
    Concentration,
};

std::string_view name(Experiment e);
/// Throws ConfigError for an unknown name.
Experiment experiment_from_name(std::string_view name);
const std::vector<Experiment> &all_experiments();

struct ExperimentConfig {
    Experiment experiment = Experiment::Decay;

    int n_qubits = 4;
    long long layers = 64;
    double eta = 0.005;
    long long steps = 100;
    /// Unset: 0 for noiseless experiments, 0.005 for lr-sweep, 1e-3 for tnoise.
    std::optional<double> sigma_theta;
    double eps0 = 1.0;
    /// Unset: "magnetization" for training experiments, "Z0" otherwise.
    std::optional<std::string> observable;

    std::vector<double> sigma_sweep{1e-4, 3e-4, 1e-3, 3e-3, 1e-2};
    std::vector<double> eta_sweep{0.0005, 0.001, 0.002, 0.005, 0.01, 0.02};
    std::vector<long long> layers_sweep{16, 32, 64, 128};
    std::vector<int> widths{64, 128, 256, 512};
    std::vector<int> ntk_widths{64, 128, 256, 512, 1024};

    std::size_t n_runs = 10;         ///< training runs per sweep point
    std::size_t samples = 500;       ///< random (ansatz, angles) draws for kernel statistics
    std::size_t crossover_runs = 20; ///< noisy runs for the T_noise crossover estimate
    std::size_t haar_samples = 10000;
    int mu_qubits = 2;
    long long mu_layers = 8;
    std::size_t mu_samples = 2000;
    int fit_window = 20;
    int classical_trials = 200;
    int ntk_trials = 100;
    int drift_width = 1024;
    int drift_samples = 8;
    long long drift_steps = 200;
    double drift_eta_scale = 0.5; ///< eta = scale / lambda_max(H(0))
    int mode_window = 5;          ///< early steps used for per-mode decay rates
    std::optional<double> k_max;

    Seed seed = 0;
    std::size_t jobs = 1;
    std::string out_dir = "out";

    /// Throws ConfigError naming the offending field.
    void validate() const;

    double resolved_sigma() const;
    Observable resolved_observable() const;
    std::string resolved_observable_spec() const;
};

/// Applies keys of a JSON config object. `source` (the raw file text, may be
/// empty) is used to report the line of an offending key.
void apply_json(ExperimentConfig &config, const nlohmann::json &doc, std::string_view source = {});
/// Parses a JSON config file; errors carry "<path>:<line>:" prefixes.
ExperimentConfig load_config_file(const std::string &path, ExperimentConfig base);

nlohmann::json to_json(const ExperimentConfig &config);

struct Check {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double expected = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

struct Table {
    std::string file; ///< e.g. "plotdata.csv"
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct ExperimentResult {
    Experiment experiment = Experiment::Decay;
    nlohmann::json summary = nlohmann::json::object();
    std::vector<Check> checks;
    std::vector<Table> tables;
    /// Additional files verbatim (name, contents).
    std::vector<std::pair<std::string, std::string>> files;

    bool passed() const;
    const Check &check(std::string_view name) const;
};

/// Reproducible problem: randomized ansatz, uniform angles, |0...0>, and a
/// target placing the initial residual at +-eps0 (toward the spectrum centre).
struct ProblemInstance {
    ResidualContext ctx;
    AngleVector theta0;
};
ProblemInstance make_instance(int n_qubits, long long layers, const Observable &o,
                              std::optional<double> eps0, Seed seed);

ExperimentResult run(const ExperimentConfig &config);
ExperimentResult run_decay(const ExperimentConfig &config);
ExperimentResult run_kbar_ensemble(const ExperimentConfig &config);
ExperimentResult run_scaling_l(const ExperimentConfig &config);
ExperimentResult run_noise_sweep(const ExperimentConfig &config);
ExperimentResult run_lr_sweep(const ExperimentConfig &config);
ExperimentResult run_tnoise(const ExperimentConfig &config);
ExperimentResult run_classical_width(const ExperimentConfig &config);
ExperimentResult run_haar_moments(const ExperimentConfig &config);
ExperimentResult run_concentration(const ExperimentConfig &config);

/// Writes summary.json, manifest.json, every table and file into `dir`.
void write_outputs(const ExperimentResult &result, const ExperimentConfig &config, const std::string &dir);

nlohmann::json summary_document(const ExperimentResult &result);
nlohmann::json manifest_document(const ExperimentConfig &config);
void write_table_csv(std::ostream &out, const Table &table);

std::string_view library_version();

inline constexpr int kSummarySchemaVersion = 1;

} // namespace qntk::experiments
