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

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qntk/error.hpp"
#include "qntk/experiments.hpp"

namespace ex = qntk::experiments;

namespace {

struct Overrides {
    std::string config_file;
    std::optional<double> eta;
    std::optional<double> sigma_theta;
    std::optional<int> qubits;
    std::optional<long long> layers;
    std::optional<long long> steps;
    std::optional<std::size_t> runs;
    std::optional<std::size_t> samples;
    std::optional<qntk::Seed> seed;
    std::optional<std::string> out;
    std::optional<std::size_t> jobs;
    std::optional<double> k_max;
    std::optional<double> eps0;
    std::optional<std::string> observable;
};

void add_options(CLI::App *cmd, Overrides &o) {
    cmd->add_option("--config", o.config_file, "JSON config file (flags override it)")->check(CLI::ExistingFile);
    cmd->add_option("--eta", o.eta, "learning rate");
    cmd->add_option("--sigma-theta", o.sigma_theta, "angle noise std per step");
    cmd->add_option("--qubits", o.qubits, "number of qubits");
    cmd->add_option("--layers", o.layers, "ansatz depth L");
    cmd->add_option("--steps", o.steps, "gradient descent steps T");
    cmd->add_option("--runs", o.runs, "runs per sweep point");
    cmd->add_option("--samples", o.samples, "ensemble samples for kernel statistics");
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--jobs", o.jobs, "worker threads");
    cmd->add_option("--k-max", o.k_max, "drop runs whose last-step K exceeds this");
    cmd->add_option("--eps0", o.eps0, "initial residual magnitude");
    cmd->add_option("--observable", o.observable, "\"magnetization\", \"identity\", \"Z0\" or \"c*LABEL+...\"");
}

ex::ExperimentConfig resolve(ex::Experiment e, const Overrides &o) {
    ex::ExperimentConfig c;
    c.experiment = e;
    c.out_dir = std::string("out/") + std::string(ex::name(e));
    if (!o.config_file.empty()) {
        c = ex::load_config_file(o.config_file, c);
        c.experiment = e;
    }
    if (o.eta) c.eta = *o.eta;
    if (o.sigma_theta) c.sigma_theta = *o.sigma_theta;
    if (o.qubits) c.n_qubits = *o.qubits;
    if (o.layers) c.layers = *o.layers;
    if (o.steps) c.steps = *o.steps;
    if (o.runs) c.n_runs = *o.runs;
    if (o.samples) c.samples = *o.samples;
    if (o.seed) c.seed = *o.seed;
    if (o.out) c.out_dir = *o.out;
    if (o.jobs) c.jobs = *o.jobs;
    if (o.k_max) c.k_max = *o.k_max;
    if (o.eps0) c.eps0 = *o.eps0;
    if (o.observable) c.observable = *o.observable;
    c.validate();
    return c;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Quantum neural tangent kernel experiments"};
    app.set_version_flag("--version", std::string(ex::library_version()));
    app.require_subcommand(1);
    Overrides overrides;
    for (const auto e : ex::all_experiments()) {
        auto *cmd = app.add_subcommand(std::string(ex::name(e)), "run the " + std::string(ex::name(e)) + " experiment");
        add_options(cmd, overrides);
    }
    CLI11_PARSE(app, argc, argv);

    try {
        const auto *chosen = app.get_subcommands().front();
        const auto e = ex::experiment_from_name(chosen->get_name());
        const auto config = resolve(e, overrides);
        const auto result = ex::run(config);
        ex::write_outputs(result, config, config.out_dir);
        for (const auto &c : result.checks) {
            std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  measured=" << c.measured
                      << " expected=" << c.expected << "  (" << c.detail << ")\n";
        }
        std::cout << "wrote " << config.out_dir << "\n";
        return result.passed() ? 0 : 1;
    } catch (const qntk::ConfigError &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
