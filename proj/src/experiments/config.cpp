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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qntk/error.hpp"
#include "qntk/experiments.hpp"

namespace qntk::experiments {

namespace {

struct NamedExperiment {
    Experiment id;
    std::string_view name;
};

constexpr NamedExperiment kNames[] = {
    {Experiment::Decay, "decay"},
    {Experiment::KbarEnsemble, "kbar-ensemble"},
    {Experiment::ScalingL, "scaling-L"},
    {Experiment::NoiseSweep, "noise-sweep"},
    {Experiment::LrSweep, "lr-sweep"},
    {Experiment::TNoise, "tnoise"},
    {Experiment::ClassicalWidth, "classical-width"},
    {Experiment::HaarMoments, "haar-moments"},
    {Experiment::Concentration, "concentration"},
};

bool is_training(Experiment e) {
    return e == Experiment::Decay || e == Experiment::NoiseSweep || e == Experiment::LrSweep ||
           e == Experiment::TNoise;
}

// 1-based line of the first occurrence of "key" in the source text, 0 if absent.
std::size_t key_line(std::string_view source, std::string_view key) {
    const std::string quoted = "\"" + std::string(key) + "\"";
    const auto pos = source.find(quoted);
    if (pos == std::string_view::npos) {
        return 0;
    }
    return 1 + static_cast<std::size_t>(std::count(source.begin(), source.begin() + pos, '\n'));
}

[[noreturn]] void fail_key(std::string_view source, std::string_view key, const std::string &what) {
    std::ostringstream msg;
    if (const auto line = key_line(source, key); line > 0) {
        msg << "line " << line << ": ";
    }
    msg << "\"" << key << "\": " << what;
    throw ConfigError(msg.str());
}

template <typename T> T get_as(const nlohmann::json &value, std::string_view source, std::string_view key) {
    try {
        return value.get<T>();
    } catch (const nlohmann::json::exception &e) {
        fail_key(source, key, std::string("wrong type (") + e.what() + ")");
    }
}

template <typename T> std::vector<T> get_list(const nlohmann::json &value, std::string_view source, std::string_view key) {
    if (!value.is_array() || value.empty()) {
        fail_key(source, key, "expected a non-empty array");
    }
    return get_as<std::vector<T>>(value, source, key);
}

} // namespace

std::string_view name(Experiment e) {
    for (const auto &entry : kNames) {
        if (entry.id == e) {
            return entry.name;
        }
    }
    return "unknown";
}

Experiment experiment_from_name(std::string_view text) {
    for (const auto &entry : kNames) {
        if (entry.name == text) {
            return entry.id;
        }
    }
    throw ConfigError("unknown experiment \"" + std::string(text) + "\"");
}

const std::vector<Experiment> &all_experiments() {
    static const std::vector<Experiment> all = [] {
        std::vector<Experiment> out;
        for (const auto &entry : kNames) {
            out.push_back(entry.id);
        }
        return out;
    }();
    return all;
}

double ExperimentConfig::resolved_sigma() const {
    if (sigma_theta) {
        return *sigma_theta;
    }
    switch (experiment) {
    case Experiment::LrSweep:
        return 0.005;
    case Experiment::TNoise:
        return 1e-3;
    default:
        return 0.0;
    }
}

std::string ExperimentConfig::resolved_observable_spec() const {
    if (observable) {
        return *observable;
    }
    return is_training(experiment) ? "magnetization" : "Z0";
}

Observable ExperimentConfig::resolved_observable() const {
    return Observable::parse(n_qubits, resolved_observable_spec());
}

void ExperimentConfig::validate() const {
    auto require = [](bool ok, const char *field, const std::string &what) {
        if (!ok) {
            throw ConfigError(std::string(field) + ": " + what);
        }
    };
    require(n_qubits >= 1 && n_qubits <= kMaxStateQubits, "n_qubits",
            "must be in [1, " + std::to_string(kMaxStateQubits) + "]");
    require(layers >= 1, "layers", "must be >= 1");
    require(std::isfinite(eta) && eta >= 0.0, "eta", "must be finite and >= 0");
    require(steps >= 0, "steps", "must be >= 0");
    if (sigma_theta) {
        require(std::isfinite(*sigma_theta) && *sigma_theta >= 0.0, "sigma_theta", "must be finite and >= 0");
    }
    require(std::isfinite(eps0) && eps0 >= 0.0, "eps0", "must be finite and >= 0");
    require(n_runs >= 1, "n_runs", "must be >= 1");
    require(samples >= 2, "samples", "must be >= 2");
    require(crossover_runs >= 2, "crossover_runs", "must be >= 2");
    require(haar_samples >= 2, "haar_samples", "must be >= 2");
    require(mu_qubits >= 1 && mu_qubits <= kMaxHessianQubits, "mu_qubits",
            "must be in [1, " + std::to_string(kMaxHessianQubits) + "]");
    require(mu_layers >= 1 && static_cast<std::size_t>(mu_layers) <= kMaxHessianLayers, "mu_layers",
            "must be in [1, " + std::to_string(kMaxHessianLayers) + "]");
    require(mu_samples >= 2, "mu_samples", "must be >= 2");
    require(fit_window >= 1, "fit_window", "must be >= 1");
    require(classical_trials >= 100, "classical_trials", "must be >= 100");
    require(ntk_trials >= 2, "ntk_trials", "must be >= 2");
    require(drift_width >= 1, "drift_width", "must be >= 1");
    require(drift_samples >= 1, "drift_samples", "must be >= 1");
    require(drift_steps >= 1, "drift_steps", "must be >= 1");
    require(mode_window >= 1 && mode_window < drift_steps, "mode_window", "must be in [1, drift_steps)");
    require(drift_eta_scale > 0.0 && drift_eta_scale < 2.0, "drift_eta_scale", "must be in (0, 2)");
    require(jobs >= 1, "jobs", "must be >= 1");
    if (k_max) {
        require(*k_max > 0.0, "k_max", "must be > 0");
    }
    for (double s : sigma_sweep) {
        require(std::isfinite(s) && s >= 0.0, "sigma_sweep", "entries must be finite and >= 0");
    }
    for (double e : eta_sweep) {
        require(std::isfinite(e) && e > 0.0, "eta_sweep", "entries must be finite and > 0");
    }
    for (long long l : layers_sweep) {
        require(l >= 1, "layers_sweep", "entries must be >= 1");
    }
    for (int w : widths) {
        require(w >= 1, "widths", "entries must be >= 1");
    }
    for (int w : ntk_widths) {
        require(w >= 1, "ntk_widths", "entries must be >= 1");
    }
    require(!sigma_sweep.empty(), "sigma_sweep", "must not be empty");
    require(!eta_sweep.empty(), "eta_sweep", "must not be empty");
    require(layers_sweep.size() >= 2, "layers_sweep", "needs at least two depths");
    require(widths.size() >= 2, "widths", "needs at least two widths");
    require(ntk_widths.size() >= 2, "ntk_widths", "needs at least two widths");
    try {
        (void)resolved_observable();
    } catch (const std::exception &e) {
        throw ConfigError(std::string("observable: ") + e.what());
    }
}

void apply_json(ExperimentConfig &c, const nlohmann::json &doc, std::string_view source) {
    if (!doc.is_object()) {
        throw ConfigError("config root must be a JSON object");
    }
    for (const auto &[key, value] : doc.items()) {
        const std::string_view k = key;
        if (k == "experiment") {
            try {
                c.experiment = experiment_from_name(get_as<std::string>(value, source, k));
            } catch (const ConfigError &e) {
                fail_key(source, k, e.what());
            }
        } else if (k == "n_qubits") {
            c.n_qubits = get_as<int>(value, source, k);
        } else if (k == "layers") {
            c.layers = get_as<long long>(value, source, k);
        } else if (k == "eta") {
            c.eta = get_as<double>(value, source, k);
        } else if (k == "steps") {
            c.steps = get_as<long long>(value, source, k);
        } else if (k == "sigma_theta") {
            c.sigma_theta = get_as<double>(value, source, k);
        } else if (k == "eps0") {
            c.eps0 = get_as<double>(value, source, k);
        } else if (k == "observable") {
            c.observable = get_as<std::string>(value, source, k);
        } else if (k == "sigma_sweep") {
            c.sigma_sweep = get_list<double>(value, source, k);
        } else if (k == "eta_sweep") {
            c.eta_sweep = get_list<double>(value, source, k);
        } else if (k == "layers_sweep") {
            c.layers_sweep = get_list<long long>(value, source, k);
        } else if (k == "widths") {
            c.widths = get_list<int>(value, source, k);
        } else if (k == "ntk_widths") {
            c.ntk_widths = get_list<int>(value, source, k);
        } else if (k == "n_runs") {
            c.n_runs = get_as<std::size_t>(value, source, k);
        } else if (k == "samples") {
            c.samples = get_as<std::size_t>(value, source, k);
        } else if (k == "crossover_runs") {
            c.crossover_runs = get_as<std::size_t>(value, source, k);
        } else if (k == "haar_samples") {
            c.haar_samples = get_as<std::size_t>(value, source, k);
        } else if (k == "mu_qubits") {
            c.mu_qubits = get_as<int>(value, source, k);
        } else if (k == "mu_layers") {
            c.mu_layers = get_as<long long>(value, source, k);
        } else if (k == "mu_samples") {
            c.mu_samples = get_as<std::size_t>(value, source, k);
        } else if (k == "fit_window") {
            c.fit_window = get_as<int>(value, source, k);
        } else if (k == "classical_trials") {
            c.classical_trials = get_as<int>(value, source, k);
        } else if (k == "ntk_trials") {
            c.ntk_trials = get_as<int>(value, source, k);
        } else if (k == "drift_width") {
            c.drift_width = get_as<int>(value, source, k);
        } else if (k == "drift_samples") {
            c.drift_samples = get_as<int>(value, source, k);
        } else if (k == "drift_steps") {
            c.drift_steps = get_as<long long>(value, source, k);
        } else if (k == "mode_window") {
            c.mode_window = get_as<int>(value, source, k);
        } else if (k == "drift_eta_scale") {
            c.drift_eta_scale = get_as<double>(value, source, k);
        } else if (k == "k_max") {
            if (value.is_null()) {
                c.k_max.reset();
            } else {
                c.k_max = get_as<double>(value, source, k);
            }
        } else if (k == "seed") {
            c.seed = get_as<Seed>(value, source, k);
        } else if (k == "jobs") {
            c.jobs = get_as<std::size_t>(value, source, k);
        } else if (k == "out_dir") {
            c.out_dir = get_as<std::string>(value, source, k);
        } else {
            fail_key(source, k, "unknown key");
        }
    }
    try {
        c.validate();
    } catch (const ConfigError &e) {
        const std::string what = e.what();
        const auto colon = what.find(':');
        if (colon == std::string::npos) {
            throw;
        }
        const std::string field = what.substr(0, colon);
        if (doc.contains(field)) {
            fail_key(source, field, what.substr(colon + 2));
        }
        throw;
    }
}

ExperimentConfig load_config_file(const std::string &path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path + ": cannot open config file");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        // Parse errors already carry "line L, column C".
        throw ConfigError(path + ": " + e.what());
    }
    try {
        apply_json(base, doc, text);
    } catch (const ConfigError &e) {
        throw ConfigError(path + ": " + e.what());
    }
    return base;
}

nlohmann::json to_json(const ExperimentConfig &c) {
    nlohmann::json j;
    j["experiment"] = name(c.experiment);
    j["n_qubits"] = c.n_qubits;
    j["layers"] = c.layers;
    j["eta"] = c.eta;
    j["steps"] = c.steps;
    j["sigma_theta"] = c.resolved_sigma();
    j["eps0"] = c.eps0;
    j["observable"] = c.resolved_observable_spec();
    j["sigma_sweep"] = c.sigma_sweep;
    j["eta_sweep"] = c.eta_sweep;
    j["layers_sweep"] = c.layers_sweep;
    j["widths"] = c.widths;
    j["ntk_widths"] = c.ntk_widths;
    j["n_runs"] = c.n_runs;
    j["samples"] = c.samples;
    j["crossover_runs"] = c.crossover_runs;
    j["haar_samples"] = c.haar_samples;
    j["mu_qubits"] = c.mu_qubits;
    j["mu_layers"] = c.mu_layers;
    j["mu_samples"] = c.mu_samples;
    j["fit_window"] = c.fit_window;
    j["classical_trials"] = c.classical_trials;
    j["ntk_trials"] = c.ntk_trials;
    j["drift_width"] = c.drift_width;
    j["drift_samples"] = c.drift_samples;
    j["drift_steps"] = c.drift_steps;
    j["drift_eta_scale"] = c.drift_eta_scale;
    j["mode_window"] = c.mode_window;
    j["k_max"] = c.k_max ? nlohmann::json(*c.k_max) : nlohmann::json(nullptr);
    j["seed"] = c.seed;
    j["jobs"] = c.jobs;
    j["out_dir"] = c.out_dir;
    return j;
}

} // namespace qntk::experiments
