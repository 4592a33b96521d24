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
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "qntk/classical.hpp"
#include "qntk/error.hpp"
#include "qntk/experiments.hpp"
#include "qntk/haar.hpp"
#include "qntk/parallel.hpp"
#include "qntk/theory.hpp"

namespace qntk::experiments {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kZ90 = 1.6448536269514722; // two-sided 90% normal quantile

struct Moments {
    double mean = 0.0;
    double std = 0.0; ///< sample standard deviation
    double se = 0.0;
};

Moments moments(const std::vector<double> &x) {
    Moments m;
    const auto n = static_cast<double>(x.size());
    for (double v : x) {
        m.mean += v;
    }
    m.mean /= n;
    double ss = 0.0;
    for (double v : x) {
        ss += (v - m.mean) * (v - m.mean);
    }
    m.std = x.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    m.se = m.std / std::sqrt(n);
    return m;
}

// Least-squares slope of y against x.
double ls_slope(const std::vector<double> &x, const std::vector<double> &y) {
    const auto n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n;
    const double my = sy / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxx > 0.0 ? sxy / sxx : kNaN;
}

double dim_of(int n_qubits) { return std::ldexp(1.0, n_qubits); }

Check relative_check(std::string check_name, double measured, double expected, double rel_tol) {
    Check c{std::move(check_name), false, measured, expected, rel_tol, ""};
    if (expected == 0.0) {
        c.passed = std::abs(measured) <= 1e-12;
    } else {
        c.passed = std::abs(measured - expected) <= rel_tol * std::abs(expected);
    }
    std::ostringstream d;
    d << "|measured - expected| <= " << rel_tol << " * |expected|";
    c.detail = d.str();
    return c;
}

Check range_check(std::string check_name, double measured, double expected, double tol) {
    Check c{std::move(check_name), std::abs(measured - expected) <= tol, measured, expected, tol, ""};
    std::ostringstream d;
    d << "|measured - expected| <= " << tol;
    c.detail = d.str();
    return c;
}

// K for `samples` independent (ansatz, angles) draws, psi0 = |0...0>.
std::vector<double> sample_kernels(int n_qubits, long long layers, const Observable &o, std::size_t samples,
                                   Seed seed, std::size_t jobs) {
    std::vector<double> k(samples);
    parallel_for(samples, jobs, [&](std::size_t i) {
        auto ansatz = build_randomized_hwe(n_qubits, static_cast<std::size_t>(layers), derive_seed(seed, 2 * i));
        Rng rng(derive_seed(seed, 2 * i + 1));
        const auto theta = AngleVector::random_uniform(static_cast<std::size_t>(layers), rng);
        const ResidualContext ctx(std::move(ansatz), StateVector(n_qubits), o, 0.0);
        k[i] = tangent_kernel(ctx, theta);
    });
    return k;
}

TrainConfig train_config(const ExperimentConfig &c, double eta, double sigma, Seed seed) {
    TrainConfig tc;
    tc.eta = eta;
    tc.steps = c.steps;
    tc.sigma_theta = sigma;
    tc.seed = seed;
    return tc;
}

Table trace_table(const TrainingTrace &trace) {
    Table t{"trace.csv", {"step", "eps", "loss", "K", "max_dtheta"}, {}};
    for (std::size_t s = 0; s < trace.eps.size(); ++s) {
        t.rows.push_back({static_cast<double>(s), trace.eps[s], trace.loss[s], trace.kernel[s],
                          s < trace.max_dtheta.size() ? trace.max_dtheta[s] : kNaN});
    }
    return t;
}

// E|U_00|^4 for Haar U(2). With |U_00| = cos(t) the induced density on
// t in [0, pi/2] is sin(2t); composite Simpson on a fine grid.
double haar_u2_fourth_moment() {
    constexpr int n = 2000;
    const double a = 0.0;
    const double b = std::numbers::pi / 2.0;
    const double h = (b - a) / n;
    auto f = [](double t) { return std::pow(std::cos(t), 4) * std::sin(2.0 * t); };
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) {
        s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    }
    return s * h / 3.0;
}

} // namespace

ProblemInstance make_instance(int n_qubits, long long layers, const Observable &o, std::optional<double> eps0,
                              Seed seed) {
    if (layers < 1) {
        throw ConfigError("layers must be >= 1");
    }
    auto ansatz = build_randomized_hwe(n_qubits, static_cast<std::size_t>(layers), derive_seed(seed, 0));
    Rng rng(derive_seed(seed, 1));
    auto theta = AngleVector::random_uniform(static_cast<std::size_t>(layers), rng);
    ResidualContext ctx(std::move(ansatz), StateVector(n_qubits), o, 0.0);
    if (eps0) {
        const double value = expectation(ctx.ansatz.evaluate(theta, ctx.psi0), o);
        ctx.target = value >= 0.0 ? value - *eps0 : value + *eps0;
    }
    return {std::move(ctx), std::move(theta)};
}

ExperimentResult run_decay(const ExperimentConfig &c) {
    c.validate();
    ExperimentResult r;
    r.experiment = Experiment::Decay;
    const Observable o = c.resolved_observable();
    const TracePowers tp = trace_powers(o);
    const double dim = dim_of(c.n_qubits);

    const auto inst = make_instance(c.n_qubits, c.layers, o, c.eps0, derive_seed(c.seed, 0));
    const TrainingTrace trace = train(inst.ctx, inst.theta0, train_config(c, c.eta, 0.0, c.seed));
    const double k0 = trace.kernel.front();
    const double e0 = trace.eps.front();

    const long long window = std::min<long long>(c.fit_window, c.steps);
    std::vector<double> ts, logs;
    for (long long t = 0; t <= window; ++t) {
        const double v = std::abs(trace.eps[static_cast<std::size_t>(t)]);
        if (v > 0.0) {
            ts.push_back(static_cast<double>(t));
            logs.push_back(std::log(v));
        }
    }
    const double slope = ts.size() >= 2 ? ls_slope(ts, logs) : kNaN;
    const double predicted_slope = std::log(std::abs(1.0 - c.eta * k0));
    r.checks.push_back(relative_check("decay_slope", slope, predicted_slope, 0.15));

    bool monotone = true;
    for (std::size_t t = 1; t < trace.eps.size(); ++t) {
        monotone = monotone && std::abs(trace.eps[t]) <= std::abs(trace.eps[t - 1]) + 1e-12;
    }

    // Frozen-kernel consistency: realised log-decay over the run against T log(1 - eta K(0)).
    const double e_final = trace.eps.back();
    const double frozen_ratio = c.steps > 0 && e0 != 0.0 && e_final != 0.0
                                    ? std::log(std::abs(e_final / e0)) / (static_cast<double>(c.steps) * predicted_slope)
                                    : kNaN;

    // Cumulative precision over independent instances.
    std::vector<double> log_inv(c.n_runs);
    std::vector<double> inst_k0(c.n_runs);
    parallel_for(c.n_runs, c.jobs, [&](std::size_t i) {
        const auto p = make_instance(c.n_qubits, c.layers, o, c.eps0, derive_seed(c.seed, i));
        const auto tr = train(p.ctx, p.theta0, train_config(c, c.eta, 0.0, c.seed));
        inst_k0[i] = tr.kernel.front();
        log_inv[i] = std::log(std::abs(tr.eps.front()) / std::abs(tr.eps.back()));
    });
    const Moments li = moments(log_inv);
    const double kbar = theory::kbar_exact(static_cast<double>(c.layers), tp, dim);
    const double predicted_log_inv = c.eta * kbar * static_cast<double>(c.steps);
    r.checks.push_back(relative_check("cumulative_precision", li.mean, predicted_log_inv, 0.30));

    const auto report = theory::make_report(c.layers, dim, tp, c.eta, 0.0, c.eps0);
    r.summary["theory"] = theory::to_json(report);
    r.summary["concentration"] = theory::to_json(theory::concentration_check(report));
    r.summary["trace"] = trace_summary(trace);
    r.summary["laziness"] = to_json(laziness_report(trace, dim));
    r.summary["K0"] = k0;
    r.summary["eps0"] = e0;
    r.summary["fit_window"] = window;
    r.summary["decay_slope"] = slope;
    r.summary["predicted_slope"] = predicted_slope;
    r.summary["monotone_abs_eps"] = monotone;
    r.summary["frozen_kernel_ratio"] = frozen_ratio;
    r.summary["ensemble"] = {{"instances", c.n_runs},
                             {"mean_log_inverse_precision", li.mean},
                             {"se_log_inverse_precision", li.se},
                             {"predicted_log_inverse_precision", predicted_log_inv},
                             {"predicted_large_n", theory::precision_log_inverse(c.eta, static_cast<double>(c.layers), tp.tr2, dim,
                                                                                 static_cast<double>(c.steps))},
                             {"mean_K0", moments(inst_k0).mean}};

    Table plot{"plotdata.csv", {"step", "eps", "abs_eps", "K", "frozen_prediction", "kbar_prediction"}, {}};
    for (std::size_t t = 0; t < trace.eps.size(); ++t) {
        const auto tt = static_cast<long long>(t);
        plot.rows.push_back({static_cast<double>(t), trace.eps[t], std::abs(trace.eps[t]), trace.kernel[t],
                             theory::decay_prediction(std::abs(e0), c.eta, k0, tt).value,
                             theory::decay_prediction(std::abs(e0), c.eta, kbar, tt).value});
    }
    r.tables.push_back(std::move(plot));
    r.tables.push_back(trace_table(trace));
    Table ens{"ensemble.csv", {"instance", "K0", "log_inverse_precision"}, {}};
    for (std::size_t i = 0; i < c.n_runs; ++i) {
        ens.rows.push_back({static_cast<double>(i), inst_k0[i], log_inv[i]});
    }
    r.tables.push_back(std::move(ens));
    r.files.emplace_back("ansatz.json", to_json(inst.ctx.ansatz).dump(2) + "\n");
    return r;
}

ExperimentResult run_kbar_ensemble(const ExperimentConfig &c) {
    c.validate();
    ExperimentResult r;
    r.experiment = Experiment::KbarEnsemble;
    const Observable o = c.resolved_observable();
    const TracePowers tp = trace_powers(o);
    const double dim = dim_of(c.n_qubits);
    const double layers = static_cast<double>(c.layers);

    const auto k = sample_kernels(c.n_qubits, c.layers, o, c.samples, c.seed, c.jobs);
    const Moments m = moments(k);
    const double kbar = theory::kbar_exact(layers, tp, dim);
    Check mean_check{"kbar_mean", false, m.mean, kbar, std::max(3.0 * m.se, 0.1 * std::abs(kbar)),
                     "|mean K - Kbar| <= max(3 SE, 10% Kbar)"};
    if (kbar == 0.0) {
        mean_check.passed = std::all_of(k.begin(), k.end(), [](double v) { return std::abs(v) <= 1e-20; });
    } else {
        mean_check.passed = std::abs(m.mean - kbar) <= mean_check.tolerance;
    }
    r.checks.push_back(mean_check);

    r.summary = {{"n_qubits", c.n_qubits},
                 {"layers", c.layers},
                 {"samples", c.samples},
                 {"observable", c.resolved_observable_spec()},
                 {"mean_K", m.mean},
                 {"se_K", m.se},
                 {"std_K", m.std},
                 {"kbar_exact", kbar},
                 {"kbar_large_n", theory::kbar_large_n(layers, tp, dim)},
                 {"delta_k_theory", theory::delta_k(layers, tp, dim)},
                 {"delta_k_ratio_measured", m.mean != 0.0 ? m.std / m.mean : kNaN},
                 {"delta_k_ratio_theory", theory::delta_k_ratio(layers, tp, dim)}};
    r.tables.push_back({"plotdata.csv",
                        {"n_qubits", "layers", "mean_K", "se_K", "std_K", "kbar_exact", "kbar_large_n", "delta_k_theory"},
                        {{static_cast<double>(c.n_qubits), layers, m.mean, m.se, m.std, kbar,
                          theory::kbar_large_n(layers, tp, dim), theory::delta_k(layers, tp, dim)}}});
    Table samples{"kernel_samples.csv", {"sample", "K"}, {}};
    for (std::size_t i = 0; i < k.size(); ++i) {
        samples.rows.push_back({static_cast<double>(i), k[i]});
    }
    r.tables.push_back(std::move(samples));
    return r;
}

ExperimentResult run_scaling_l(const ExperimentConfig &c) {
    c.validate();
    ExperimentResult r;
    r.experiment = Experiment::ScalingL;
    const Observable o = c.resolved_observable();
    const TracePowers tp = trace_powers(o);
    const double dim = dim_of(c.n_qubits);

    Table plot{"plotdata.csv", {"layers", "mean_K", "std_K", "ratio", "ratio_theory", "kbar_exact"}, {}};
    std::vector<double> log_l, log_ratio;
    nlohmann::json points = nlohmann::json::array();
    for (std::size_t j = 0; j < c.layers_sweep.size(); ++j) {
        const long long layers = c.layers_sweep[j];
        const auto k = sample_kernels(c.n_qubits, layers, o, c.samples, derive_seed(c.seed, j), c.jobs);
        const Moments m = moments(k);
        const double ratio = m.std / m.mean;
        const double l = static_cast<double>(layers);
        const double ratio_theory = theory::delta_k_ratio(l, tp, dim);
        plot.rows.push_back({l, m.mean, m.std, ratio, ratio_theory, theory::kbar_exact(l, tp, dim)});
        points.push_back({{"layers", layers}, {"mean_K", m.mean}, {"std_K", m.std}, {"ratio", ratio}, {"ratio_theory", ratio_theory}});
        log_l.push_back(std::log(l));
        log_ratio.push_back(std::log(ratio));
    }
    const double slope = ls_slope(log_l, log_ratio);
    r.checks.push_back(range_check("ratio_exponent", slope, -0.5, 0.15));
    r.summary = {{"n_qubits", c.n_qubits}, {"samples", c.samples}, {"observable", c.resolved_observable_spec()},
                 {"points", points}, {"fitted_exponent", slope}};
    r.tables.push_back(std::move(plot));
    return r;
}

ExperimentResult run_noise_sweep(const ExperimentConfig &c) {
    c.validate();
    ExperimentResult r;
    r.experiment = Experiment::NoiseSweep;
    const Observable o = c.resolved_observable();
    const auto inst = make_instance(c.n_qubits, c.layers, o, c.eps0, derive_seed(c.seed, 0));
    const RunBuilder builder = [&inst](std::size_t, Seed) { return RunSetup{inst.ctx, inst.theta0}; };
    const double noiseless_final = std::abs(train(inst.ctx, inst.theta0, train_config(c, c.eta, 0.0, c.seed)).eps.back());

    Table plot{"plotdata.csv",
               {"sigma_theta", "mean_abs_eps", "std_eps", "mean_K", "theory_mean", "ci_low", "ci_high", "theory_std", "kept",
                "filtered"},
               {}};
    nlohmann::json points = nlohmann::json::array();
    std::size_t noisy_points = 0;
    std::size_t inside = 0;
    for (std::size_t j = 0; j < c.sigma_sweep.size(); ++j) {
        const double sigma = c.sigma_sweep[j];
        const auto ens = ensemble_train(builder, train_config(c, c.eta, sigma, derive_seed(c.seed, 1000 + j)),
                                        {c.n_runs, c.jobs, c.k_max, false});
        double theory_mean = noiseless_final;
        double theory_std = 0.0;
        double lo = noiseless_final;
        double hi = noiseless_final;
        bool in_ci = false;
        if (ens.kept == 0) {
            theory_mean = kNaN;
        } else if (sigma > 0.0) {
            ++noisy_points;
            const auto hn = theory::half_normal_mean(c.eta, ens.mean_final_kernel, sigma);
            theory_mean = hn.convergent ? hn.value : kNaN;
            theory_std = theory_mean * std::sqrt(std::numbers::pi / 2.0);
            const double half = kZ90 * theory_std * std::sqrt(1.0 - 2.0 / std::numbers::pi) /
                                std::sqrt(static_cast<double>(ens.kept));
            lo = theory_mean - half;
            hi = theory_mean + half;
            in_ci = hn.convergent && ens.mean_abs_final_eps >= lo && ens.mean_abs_final_eps <= hi;
            inside += in_ci ? 1 : 0;
        } else {
            in_ci = std::abs(ens.mean_abs_final_eps - noiseless_final) <= 1e-12 * std::max(1.0, noiseless_final);
        }
        plot.rows.push_back({sigma, ens.mean_abs_final_eps, ens.std_final_eps, ens.mean_final_kernel, theory_mean, lo, hi,
                             theory_std, static_cast<double>(ens.kept), static_cast<double>(ens.filtered)});
        points.push_back({{"sigma_theta", sigma},
                          {"mean_abs_eps", ens.mean_abs_final_eps},
                          {"std_eps", ens.std_final_eps},
                          {"mean_K", ens.mean_final_kernel},
                          {"theory_mean", theory_mean},
                          {"ci", {lo, hi}},
                          {"inside_ci", in_ci},
                          {"kept", ens.kept},
                          {"filtered", ens.filtered}});
    }
    const auto required = static_cast<std::size_t>(std::ceil(0.8 * static_cast<double>(noisy_points)));
    Check ci{"half_normal_ci", noisy_points > 0 && inside >= required, static_cast<double>(inside),
             static_cast<double>(required), 0.0, "sweep points with mean |eps(T)| inside the 90% CI"};
    r.checks.push_back(ci);
    r.summary = {{"eta", c.eta}, {"steps", c.steps}, {"n_runs", c.n_runs}, {"noiseless_final_abs_eps", noiseless_final},
                 {"points", points}};
    r.tables.push_back(std::move(plot));
    return r;
}

ExperimentResult run_lr_sweep(const ExperimentConfig &c) {
    c.validate();
    ExperimentResult r;
    r.experiment = Experiment::LrSweep;
    const Observable o = c.resolved_observable();
    const double sigma = c.resolved_sigma();
    const auto inst = make_instance(c.n_qubits, c.layers, o, c.eps0, derive_seed(c.seed, 0));
    const RunBuilder builder = [&inst](std::size_t, Seed) { return RunSetup{inst.ctx, inst.theta0}; };
    const double e0 = std::abs(residual(inst.ctx, inst.theta0));

    Table plot{"plotdata.csv", {"eta", "std_eps", "mean_K", "theory_std", "ratio", "t_noise", "gated"}, {}};
    nlohmann::json points = nlohmann::json::array();
    std::size_t gated = 0;
    bool all_ok = true;
    double worst = 1.0;
    for (std::size_t j = 0; j < c.eta_sweep.size(); ++j) {
        const double eta = c.eta_sweep[j];
        const auto ens = ensemble_train(builder, train_config(c, eta, sigma, derive_seed(c.seed, 2000 + j)),
                                        {c.n_runs, c.jobs, c.k_max, false});
        const double k = ens.mean_final_kernel;
        const auto p = theory::plateau(eta, k, sigma);
        const double theory_std = p.convergent ? std::sqrt(p.value) : kNaN;
        const auto tn = theory::t_noise(e0, eta, k, sigma);
        const bool in_gate = tn.valid && tn.value < static_cast<double>(c.steps) && ens.kept > 1;
        const double ratio = ens.std_final_eps / theory_std;
        if (in_gate) {
            ++gated;
            const bool ok = ratio >= 0.5 && ratio <= 2.0;
            all_ok = all_ok && ok;
            if (std::abs(std::log(ratio)) > std::abs(std::log(worst))) {
                worst = ratio;
            }
        }
        plot.rows.push_back({eta, ens.std_final_eps, k, theory_std, ratio, tn.value, in_gate ? 1.0 : 0.0});
        points.push_back({{"eta", eta},
                          {"std_eps", ens.std_final_eps},
                          {"mean_K", k},
                          {"theory_std", theory_std},
                          {"ratio", ratio},
                          {"t_noise", std::isfinite(tn.value) ? nlohmann::json(tn.value) : nlohmann::json(nullptr)},
                          {"gated", in_gate}});
    }
    r.checks.push_back({"fluctuation_law", gated > 0 && all_ok, worst, 1.0, 2.0,
                        "std(eps(T)) / theory in [0.5, 2] for every eta with T_noise < T"});
    r.summary = {{"sigma_theta", sigma}, {"steps", c.steps}, {"n_runs", c.n_runs}, {"eps0", e0}, {"gated_points", gated},
                 {"points", points}};
    r.tables.push_back(std::move(plot));
    return r;
}

ExperimentResult run_tnoise(const ExperimentConfig &c) {
    c.validate();
    ExperimentResult r;
    r.experiment = Experiment::TNoise;
    const Observable o = c.resolved_observable();
    const double sigma = c.resolved_sigma();
    const auto inst = make_instance(c.n_qubits, c.layers, o, c.eps0, derive_seed(c.seed, 0));
    const auto noiseless = train(inst.ctx, inst.theta0, train_config(c, c.eta, 0.0, c.seed));
    const double e0 = std::abs(noiseless.eps.front());
    const double k0 = noiseless.kernel.front();
    const auto tn = theory::t_noise(e0, c.eta, k0, sigma);

    // Balance: (1 - eta K)^T eps0 against the accumulated noise std at T.
    double balance = kNaN;
    if (tn.valid && std::isfinite(tn.value)) {
        const double rr = 1.0 - c.eta * k0;
        const double lhs = std::pow(rr, tn.value) * e0;
        const double rhs = std::sqrt(theory::noise_variance(c.eta, k0, sigma, tn.value).value);
        balance = std::abs(lhs - rhs);
    }
    r.checks.push_back({"balance_equation", std::isfinite(balance) && balance <= 1e-9, balance, 0.0, 1e-9,
                        "|(1 - eta K)^T eps0 - sqrt(noise variance at T)|"});

    EnsembleOptions opts{c.crossover_runs, c.jobs, std::nullopt, true};
    const RunBuilder builder = [&inst](std::size_t, Seed) { return RunSetup{inst.ctx, inst.theta0}; };
    const auto ens = ensemble_train(builder, train_config(c, c.eta, sigma, derive_seed(c.seed, 3000)), opts);
    const std::size_t len = noiseless.eps.size();
    std::vector<double> band(len, 0.0);
    double crossover = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < len; ++t) {
        std::vector<double> column;
        column.reserve(ens.traces.size());
        for (const auto &tr : ens.traces) {
            column.push_back(tr.eps[t]);
        }
        band[t] = moments(column).std;
        if (!std::isfinite(crossover) && band[t] >= std::abs(noiseless.eps[t])) {
            crossover = static_cast<double>(t);
        }
    }
    const double ratio = crossover / tn.value;
    r.checks.push_back({"crossover", tn.valid && ratio >= 0.5 && ratio <= 2.0, crossover, tn.value, 2.0,
                        "simulated crossover within a factor of 2 of T_noise"});

    // Scan eps(T_noise) over eta in (0, 2/K).
    constexpr int grid = 2000;
    double best_eta = kNaN;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 1; i < grid; ++i) {
        const double eta = 2.0 / k0 * i / grid;
        const double v = theory::crossover_residual(e0, eta, k0, sigma);
        if (v < best) {
            best = v;
            best_eta = eta;
        }
    }
    r.summary = {{"eta", c.eta},
                 {"sigma_theta", sigma},
                 {"eps0", e0},
                 {"K0", k0},
                 {"t_noise", std::isfinite(tn.value) ? nlohmann::json(tn.value) : nlohmann::json(nullptr)},
                 {"t_noise_valid", tn.valid},
                 {"crossover", std::isfinite(crossover) ? nlohmann::json(crossover) : nlohmann::json(nullptr)},
                 {"runs", c.crossover_runs},
                 {"optimal_eta_scan", best_eta},
                 {"optimal_eta_inverse_k", 1.0 / k0}};

    Table plot{"plotdata.csv", {"step", "eps_noiseless", "abs_eps_noiseless", "noise_band", "noise_std_theory"}, {}};
    for (std::size_t t = 0; t < len; ++t) {
        const auto nv = theory::noise_variance(c.eta, k0, sigma, static_cast<double>(t));
        plot.rows.push_back({static_cast<double>(t), noiseless.eps[t], std::abs(noiseless.eps[t]), band[t],
                             nv.convergent ? std::sqrt(nv.value) : kNaN});
    }
    r.tables.push_back(std::move(plot));
    return r;
}

ExperimentResult run_haar_moments(const ExperimentConfig &c) {
    c.validate();
    ExperimentResult r;
    r.experiment = Experiment::HaarMoments;
    const std::size_t s = c.haar_samples;
    double worst_first = 0.0, worst_second = 0.0;
    Table plot{"plotdata.csv", {"dim", "max_z_first", "max_z_second", "fourth_moment", "fourth_moment_se", "fourth_expected"}, {}};
    nlohmann::json dims = nlohmann::json::array();
    bool fourth_ok = true;
    for (std::size_t dim : {std::size_t{2}, std::size_t{4}}) {
        const auto d = static_cast<Eigen::Index>(dim);
        Rng rng(derive_seed(c.seed, dim));
        const std::size_t pairs = dim * dim;
        // Running sums for first moments, second moments and |U_00|^4.
        std::vector<Complex> s1(pairs), s1sq(pairs);
        std::vector<double> s1abs(pairs, 0.0);
        std::vector<Complex> s2(pairs * pairs);
        std::vector<double> s2abs(pairs * pairs, 0.0);
        std::vector<double> fourth(s);
        for (std::size_t k = 0; k < s; ++k) {
            const ComplexMatrix u = haar_matrix(dim, rng);
            for (Eigen::Index i = 0; i < d; ++i) {
                for (Eigen::Index j = 0; j < d; ++j) {
                    const auto a = static_cast<std::size_t>(i * d + j);
                    s1[a] += u(i, j);
                    s1abs[a] += std::norm(u(i, j));
                    for (Eigen::Index l = 0; l < d; ++l) {
                        for (Eigen::Index m = 0; m < d; ++m) {
                            const auto b = static_cast<std::size_t>(l * d + m);
                            const Complex v = u(i, j) * std::conj(u(l, m));
                            s2[a * pairs + b] += v;
                            s2abs[a * pairs + b] += std::norm(v);
                        }
                    }
                }
            }
            fourth[k] = std::pow(std::norm(u(0, 0)), 2);
        }
        const auto n = static_cast<double>(s);
        auto z_score = [n](Complex sum, double sum_abs2, Complex target) {
            const Complex mean = sum / n;
            const double var = (sum_abs2 - n * std::norm(mean)) / (n - 1.0);
            return std::abs(mean - target) / std::sqrt(var / n);
        };
        double max_first = 0.0, max_second = 0.0;
        for (std::size_t a = 0; a < pairs; ++a) {
            max_first = std::max(max_first, z_score(s1[a], s1abs[a], 0.0));
            for (std::size_t b = 0; b < pairs; ++b) {
                // E[U_ij conj(U_lm)] = delta_il delta_jm / N
                const Complex target = a == b ? Complex(1.0 / static_cast<double>(dim), 0.0) : Complex(0.0, 0.0);
                max_second = std::max(max_second, z_score(s2[a * pairs + b], s2abs[a * pairs + b], target));
            }
        }
        const Moments f = moments(fourth);
        const double expected4 = dim == 2 ? haar_u2_fourth_moment() : 2.0 / (static_cast<double>(dim) * (dim + 1.0));
        const bool ok4 = std::abs(f.mean - expected4) <= 3.0 * f.se;
        fourth_ok = fourth_ok && ok4;
        worst_first = std::max(worst_first, max_first);
        worst_second = std::max(worst_second, max_second);
        plot.rows.push_back({static_cast<double>(dim), max_first, max_second, f.mean, f.se, expected4});
        dims.push_back({{"dim", dim},
                        {"max_z_first", max_first},
                        {"max_z_second", max_second},
                        {"fourth_moment", f.mean},
                        {"fourth_moment_se", f.se},
                        {"fourth_expected", expected4}});
    }
    r.checks.push_back({"first_moment", worst_first <= 3.0, worst_first, 0.0, 3.0, "max |mean - 0| / SE over entries"});
    r.checks.push_back({"second_moment", worst_second <= 3.0, worst_second, 0.0, 3.0,
                        "max |mean - delta_il delta_jk / N| / SE over entries"});
    r.checks.push_back({"fourth_moment", fourth_ok, kNaN, kNaN, 3.0, "E|U_00|^4 within 3 SE of the oracle"});
    r.summary = {{"samples", s}, {"dims", dims}};
    r.tables.push_back(std::move(plot));
    return r;
}

ExperimentResult run_concentration(const ExperimentConfig &c) {
    c.validate();
    ExperimentResult r;
    r.experiment = Experiment::Concentration;
    const Observable o = c.resolved_observable();
    const TracePowers tp = trace_powers(o);
    const double dim = dim_of(c.n_qubits);
    const auto report = theory::make_report(c.layers, dim, tp, c.eta, c.resolved_sigma(), c.eps0);
    const auto cc = theory::concentration_check(report);
    r.checks.push_back({"meta_kernel_condition", cc.meta_kernel.pass, cc.meta_kernel.ratio, 0.0, cc.threshold,
                        "eta sqrt(Tr O^2) eps0 / N <= threshold"});

    Observable mu_o = Observable::identity(c.mu_qubits);
    try {
        mu_o = Observable::parse(c.mu_qubits, c.resolved_observable_spec());
    } catch (const std::exception &e) {
        throw ConfigError(std::string("observable for mu_qubits: ") + e.what());
    }
    const auto mu_layers = static_cast<std::size_t>(c.mu_layers);
    std::vector<double> mu(c.mu_samples);
    const Seed mu_seed = derive_seed(c.seed, 4000);
    parallel_for(c.mu_samples, c.jobs, [&](std::size_t i) {
        auto ansatz = build_randomized_hwe(c.mu_qubits, mu_layers, derive_seed(mu_seed, 2 * i));
        Rng rng(derive_seed(mu_seed, 2 * i + 1));
        const auto theta = AngleVector::random_uniform(mu_layers, rng);
        const ResidualContext ctx(std::move(ansatz), StateVector(c.mu_qubits), mu_o, 0.0);
        mu[i] = dqntk_mu(ctx, theta);
    });
    const Moments m = moments(mu);
    const double dmu = theory::delta_mu(static_cast<double>(c.mu_layers), trace_powers(mu_o), dim_of(c.mu_qubits));
    r.checks.push_back({"mu_mean_zero", std::abs(m.mean) <= 3.0 * m.se, m.mean, 0.0, 3.0 * m.se, "|mean mu| <= 3 SE"});
    const double ratio = m.std / dmu;
    r.checks.push_back({"delta_mu_order", ratio >= 1.0 / 3.0 && ratio <= 3.0, m.std, dmu, 3.0,
                        "measured std of mu within a factor of 3 of theory"});

    r.summary = {{"theory", theory::to_json(report)},
                 {"conditions", theory::to_json(cc)},
                 {"mu", {{"n_qubits", c.mu_qubits},
                         {"layers", c.mu_layers},
                         {"samples", c.mu_samples},
                         {"mean", m.mean},
                         {"se", m.se},
                         {"std", m.std},
                         {"delta_mu_theory", dmu}}}};
    r.tables.push_back({"plotdata.csv",
                        {"kernel_ratio", "meta_kernel_ratio", "threshold", "mu_mean", "mu_se", "mu_std", "delta_mu_theory"},
                        {{cc.kernel_concentration.ratio, cc.meta_kernel.ratio, cc.threshold, m.mean, m.se, m.std, dmu}}});
    Table samples{"mu_samples.csv", {"sample", "mu"}, {}};
    for (std::size_t i = 0; i < mu.size(); ++i) {
        samples.rows.push_back({static_cast<double>(i), mu[i]});
    }
    r.tables.push_back(std::move(samples));
    return r;
}

ExperimentResult run_classical_width(const ExperimentConfig &c) {
    c.validate();
    using namespace qntk::classical;
    ExperimentResult r;
    r.experiment = Experiment::ClassicalWidth;

    GradVarianceConfig gv;
    gv.widths = c.widths;
    gv.trials = c.classical_trials;
    gv.seed = derive_seed(c.seed, 1);
    gv.jobs = c.jobs;
    const ScalingFit var_fit = grad_variance_experiment(gv);
    r.checks.push_back(range_check("gradient_variance_exponent", var_fit.slope, -1.0, 0.15));
    double worst_mean_z = 0.0;
    for (const auto &p : var_fit.points) {
        worst_mean_z = std::max(worst_mean_z, std::abs(p.mean_entry) / p.mean_entry_se);
    }
    r.checks.push_back({"gradient_mean_zero", worst_mean_z <= 3.0, worst_mean_z, 0.0, 3.0, "max |mean| / SE over widths"});

    NtkFluctuationConfig nf;
    nf.widths = c.ntk_widths;
    nf.trials = c.ntk_trials;
    nf.seed = derive_seed(c.seed, 2);
    nf.jobs = c.jobs;
    const ScalingFit ntk_fit = ntk_fluctuation_experiment(nf);
    r.checks.push_back(range_check("ntk_fluctuation_exponent", ntk_fit.slope, -0.5, 0.2));

    // Lazy training on a fixed dataset at every width; the drift check uses drift_width.
    Rng data_rng(derive_seed(c.seed, 3));
    const int input_dim = 4;
    Eigen::MatrixXd x(input_dim, c.drift_samples);
    Eigen::MatrixXd y(1, c.drift_samples);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            x(i, j) = data_rng.normal();
        }
        y(0, j) = data_rng.normal();
    }
    std::vector<int> train_widths = c.ntk_widths;
    if (std::find(train_widths.begin(), train_widths.end(), c.drift_width) == train_widths.end()) {
        train_widths.push_back(c.drift_width);
    }
    std::sort(train_widths.begin(), train_widths.end());
    Table plot{"plotdata.csv", {"width", "ntk_drift", "weight_displacement", "eta", "final_loss"}, {}};
    nlohmann::json runs = nlohmann::json::array();
    std::vector<double> displacement;
    double drift_at_width = kNaN;
    std::vector<ModeDecay> modes;
    double drift_eta = kNaN;
    for (std::size_t j = 0; j < train_widths.size(); ++j) {
        const int w = train_widths[j];
        Mlp net = Mlp::lecun({input_dim, w, w, 1}, Activation::Tanh, 1.0, 0.0, derive_seed(c.seed, 100 + j));
        const NtkMatrix h0 = ntk(net, x);
        const double lambda_max = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h0.h).eigenvalues().maxCoeff();
        TrainOptions opts;
        opts.eta = c.drift_eta_scale / lambda_max;
        opts.steps = c.drift_steps;
        const ClassicalTrace trace = ntk_train(std::move(net), x, y, opts);
        displacement.push_back(trace.weight_displacement);
        plot.rows.push_back({static_cast<double>(w), trace.ntk_drift, trace.weight_displacement, opts.eta, trace.loss.back()});
        runs.push_back({{"width", w},
                        {"ntk_drift", trace.ntk_drift},
                        {"weight_displacement", trace.weight_displacement},
                        {"eta", opts.eta},
                        {"final_loss", trace.loss.back()},
                        {"diverged", trace.diverged}});
        if (w == c.drift_width) {
            drift_at_width = trace.diverged ? kNaN : trace.ntk_drift;
            drift_eta = opts.eta;
            modes = mode_decay(trace, opts.eta, c.mode_window);
            std::ostringstream csv;
            write_trace_csv(csv, trace);
            r.files.emplace_back("trace.csv", csv.str());
        }
    }
    r.checks.push_back({"ntk_drift", std::isfinite(drift_at_width) && drift_at_width <= 0.05, drift_at_width, 0.0, 0.05,
                        "||H(T) - H(0)||_F / ||H(0)||_F at drift_width"});
    bool decreasing = true;
    for (std::size_t j = 1; j < displacement.size(); ++j) {
        decreasing = decreasing && displacement[j] < displacement[j - 1];
    }
    r.checks.push_back({"weight_displacement_decreases", decreasing, displacement.back(), kNaN, 0.0,
                        "relative weight displacement strictly decreases with width"});

    // Modes that move at least 1% per step over the early window.
    double worst_mode = 0.0;
    std::size_t resolved = 0;
    for (const auto &m : modes) {
        if (m.predicted_rate >= 0.01) {
            ++resolved;
            const double err = std::isfinite(m.measured_rate) ? std::abs(m.measured_rate / m.predicted_rate - 1.0)
                                                              : std::numeric_limits<double>::infinity();
            worst_mode = std::max(worst_mode, err);
        }
    }
    r.checks.push_back({"mode_decay", resolved > 0 && worst_mode <= 0.2, worst_mode, 0.0, 0.2,
                        "max relative error of early per-mode decay rate vs eta lambda_k"});

    nlohmann::json mode_json = nlohmann::json::array();
    Table mode_table{"modes.csv", {"eigenvalue", "predicted_rate", "measured_rate", "initial_weight"}, {}};
    for (const auto &m : modes) {
        mode_json.push_back({{"eigenvalue", m.eigenvalue},
                             {"predicted_rate", m.predicted_rate},
                             {"measured_rate", std::isfinite(m.measured_rate) ? nlohmann::json(m.measured_rate) : nlohmann::json(nullptr)},
                             {"initial_weight", m.initial_weight}});
        mode_table.rows.push_back({m.eigenvalue, m.predicted_rate, m.measured_rate, m.initial_weight});
    }
    r.summary = {{"gradient_variance", to_json(var_fit)},
                 {"ntk_fluctuation", to_json(ntk_fit)},
                 {"training", runs},
                 {"drift_width", c.drift_width},
                 {"drift_eta", drift_eta},
                 {"modes", mode_json}};
    r.tables.push_back(std::move(plot));
    r.tables.push_back(std::move(mode_table));
    Table scaling{"scaling.csv", {"series", "width", "value", "value_se"}, {}};
    for (const auto &p : var_fit.points) {
        scaling.rows.push_back({0.0, static_cast<double>(p.width), p.value, p.value_se});
    }
    for (const auto &p : ntk_fit.points) {
        scaling.rows.push_back({1.0, static_cast<double>(p.width), p.value, p.value_se});
    }
    r.tables.push_back(std::move(scaling));
    return r;
}

ExperimentResult run(const ExperimentConfig &config) {
    switch (config.experiment) {
    case Experiment::Decay:
        return run_decay(config);
    case Experiment::KbarEnsemble:
        return run_kbar_ensemble(config);
    case Experiment::ScalingL:
        return run_scaling_l(config);
    case Experiment::NoiseSweep:
        return run_noise_sweep(config);
    case Experiment::LrSweep:
        return run_lr_sweep(config);
    case Experiment::TNoise:
        return run_tnoise(config);
    case Experiment::ClassicalWidth:
        return run_classical_width(config);
    case Experiment::HaarMoments:
        return run_haar_moments(config);
    case Experiment::Concentration:
        return run_concentration(config);
    }
    throw ConfigError("unhandled experiment");
}

} // namespace qntk::experiments
