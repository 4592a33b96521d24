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

#include "qntk/dynamics.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "qntk/error.hpp"
#include "qntk/parallel.hpp"

namespace qntk {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_finite(const ResidualGradient &rg, long long step) {
    if (!std::isfinite(rg.residual)) {
        throw NumericalError("non-finite residual at step " + std::to_string(step));
    }
    for (std::size_t l = 0; l < rg.gradient.size(); ++l) {
        if (!std::isfinite(rg.gradient[l])) {
            throw NumericalError("non-finite gradient component " + std::to_string(l) + " at step " +
                                 std::to_string(step));
        }
    }
}

// Applies the update in place and returns max_l |deterministic part|.
double apply_update(AngleVector &theta, const ResidualGradient &rg, const TrainConfig &cfg, Rng &rng) {
    double max_step = 0.0;
    for (std::size_t l = 0; l < theta.size(); ++l) {
        const double step = -cfg.eta * rg.residual * rg.gradient[l];
        max_step = std::max(max_step, std::abs(step));
        theta[l] += step;
    }
    if (cfg.sigma_theta > 0.0) {
        for (std::size_t l = 0; l < theta.size(); ++l) {
            theta[l] += cfg.sigma_theta * rng.normal();
        }
    }
    return max_step;
}

std::string format_value(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
}

} // namespace

void TrainConfig::validate() const {
    if (!std::isfinite(eta) || eta < 0.0) {
        throw ConfigError("eta must be finite and >= 0");
    }
    if (!std::isfinite(sigma_theta) || sigma_theta < 0.0) {
        throw ConfigError("sigma_theta must be finite and >= 0");
    }
    if (steps < 0) {
        throw ConfigError("steps must be >= 0");
    }
    if (steps > max_steps) {
        throw ConfigError("steps " + std::to_string(steps) + " exceed the guard " +
                          std::to_string(max_steps));
    }
    if (record_k_every < 1) {
        throw ConfigError("record_k_every must be >= 1");
    }
}

GdStep gd_step(const ResidualContext &ctx, const AngleVector &theta, const TrainConfig &cfg, Rng &rng) {
    cfg.validate();
    const ResidualGradient rg = residual_and_gradient(ctx, theta);
    require_finite(rg, 0);
    GdStep out{theta, {}};
    out.record.eps_before = rg.residual;
    out.record.kernel = rg.gradient.squared_norm();
    out.record.max_dtheta = apply_update(out.theta, rg, cfg, rng);
    out.record.eps_after = residual(ctx, out.theta);
    return out;
}

TrainingTrace train(const ResidualContext &ctx, const AngleVector &theta0, const TrainConfig &cfg) {
    cfg.validate();
    ctx.ansatz.check_angles(theta0);
    const auto steps = static_cast<std::size_t>(cfg.steps);
    TrainingTrace trace;
    trace.eps.reserve(steps + 1);
    trace.loss.reserve(steps + 1);
    trace.kernel.reserve(steps + 1);
    trace.max_dtheta.reserve(steps);
    trace.initial_theta = theta0;

    Rng rng(cfg.seed);
    AngleVector theta = theta0;
    for (std::size_t t = 0;; ++t) {
        if (cfg.record_thetas) {
            trace.thetas.push_back(theta);
        }
        const ResidualGradient rg = residual_and_gradient(ctx, theta);
        require_finite(rg, static_cast<long long>(t));
        trace.eps.push_back(rg.residual);
        trace.loss.push_back(0.5 * rg.residual * rg.residual);
        const bool sample_k = t == steps || t % static_cast<std::size_t>(cfg.record_k_every) == 0;
        trace.kernel.push_back(sample_k ? rg.gradient.squared_norm() : kNaN);
        if (t == steps) {
            break;
        }
        trace.max_dtheta.push_back(apply_update(theta, rg, cfg, rng));
    }
    trace.final_theta = theta;
    return trace;
}

void write_trace_csv(std::ostream &out, const TrainingTrace &trace) {
    out << "step,eps,loss,K,max_dtheta\n";
    for (std::size_t t = 0; t < trace.eps.size(); ++t) {
        out << t << ',' << format_value(trace.eps[t]) << ',' << format_value(trace.loss[t]) << ','
            << format_value(trace.kernel[t]) << ','
            << format_value(t < trace.max_dtheta.size() ? trace.max_dtheta[t] : kNaN) << '\n';
    }
}

nlohmann::json trace_summary(const TrainingTrace &trace) {
    return {{"steps", trace.steps()},
            {"eps0", trace.eps.front()},
            {"final_eps", trace.eps.back()},
            {"initial_K", trace.kernel.front()},
            {"final_K", trace.kernel.back()},
            {"final_theta", std::vector<double>(trace.final_theta.values().begin(),
                                                trace.final_theta.values().end())}};
}

EnsembleSummary ensemble_train(const RunBuilder &builder, const TrainConfig &cfg,
                               const EnsembleOptions &options) {
    cfg.validate();
    if (options.n_runs < 2) {
        throw ConfigError("an ensemble needs at least 2 runs");
    }
    EnsembleSummary summary;
    summary.runs.resize(options.n_runs);
    std::vector<TrainingTrace> traces(options.n_runs);
    parallel_for(options.n_runs, options.jobs, [&](std::size_t i) {
        const Seed seed = derive_seed(cfg.seed, i);
        RunSetup setup = builder(i, seed);
        TrainConfig run_cfg = cfg;
        run_cfg.seed = seed;
        traces[i] = train(setup.ctx, setup.theta0, run_cfg);
        auto &r = summary.runs[i];
        r.seed = seed;
        r.eps0 = traces[i].eps.front();
        r.final_eps = traces[i].eps.back();
        r.initial_kernel = traces[i].kernel.front();
        r.final_kernel = traces[i].final_kernel();
        r.filtered = options.k_max && r.final_kernel > *options.k_max;
    });

    double sum_abs = 0.0;
    double sum = 0.0;
    double sum_k = 0.0;
    for (const auto &r : summary.runs) {
        if (r.filtered) {
            ++summary.filtered;
            continue;
        }
        ++summary.kept;
        sum_abs += std::abs(r.final_eps);
        sum += r.final_eps;
        sum_k += r.final_kernel;
    }
    if (summary.kept > 0) {
        const auto n = static_cast<double>(summary.kept);
        summary.mean_abs_final_eps = sum_abs / n;
        summary.mean_final_kernel = sum_k / n;
        const double mean = sum / n;
        double ss = 0.0;
        for (const auto &r : summary.runs) {
            if (!r.filtered) {
                ss += (r.final_eps - mean) * (r.final_eps - mean);
            }
        }
        summary.std_final_eps = summary.kept > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    }
    if (options.keep_traces) {
        summary.traces = std::move(traces);
    }
    return summary;
}

LazinessReport laziness_report(const TrainingTrace &trace, double dim) {
    if (trace.eps.empty()) {
        throw std::invalid_argument("laziness_report needs a non-empty trace");
    }
    LazinessReport r;
    r.dim = dim;
    for (double d : trace.max_dtheta) {
        r.max_step_dtheta = std::max(r.max_step_dtheta, d);
    }
    double ss = 0.0;
    for (std::size_t l = 0; l < trace.final_theta.size(); ++l) {
        const double d = trace.final_theta[l] - trace.initial_theta[l];
        ss += d * d;
        r.max_angle_displacement = std::max(r.max_angle_displacement, std::abs(d));
    }
    r.total_displacement = std::sqrt(ss);
    const double e0 = std::abs(trace.eps.front());
    r.relative_error = e0 > 0.0 ? std::abs(trace.eps.back()) / e0 : 0.0;
    return r;
}

nlohmann::json to_json(const LazinessReport &r) {
    return {{"max_step_dtheta", r.max_step_dtheta},
            {"total_displacement", r.total_displacement},
            {"max_angle_displacement", r.max_angle_displacement},
            {"relative_error", r.relative_error},
            {"N", r.dim}};
}

} // namespace qntk
