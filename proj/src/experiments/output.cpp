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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <stdexcept>

#include "qntk/error.hpp"
#include "qntk/experiments.hpp"

#ifndef QNTK_VERSION
#define QNTK_VERSION "unknown"
#endif

namespace qntk::experiments {

namespace {

nlohmann::json finite_or_null(double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

void write_file(const std::filesystem::path &path, const std::string &contents) {
    std::ofstream out(path);
    if (!out) {
        throw ResourceError("cannot write " + path.string());
    }
    out << contents;
    if (!out) {
        throw ResourceError("write failed for " + path.string());
    }
}

} // namespace

std::string_view library_version() { return QNTK_VERSION; }

bool ExperimentResult::passed() const {
    for (const auto &c : checks) {
        if (!c.passed) {
            return false;
        }
    }
    return true;
}

const Check &ExperimentResult::check(std::string_view check_name) const {
    for (const auto &c : checks) {
        if (c.name == check_name) {
            return c;
        }
    }
    throw std::out_of_range("no check named " + std::string(check_name));
}

void write_table_csv(std::ostream &out, const Table &table) {
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        out << (i ? "," : "") << table.columns[i];
    }
    out << '\n' << std::setprecision(17);
    for (const auto &row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << (i ? "," : "");
            if (std::isnan(row[i])) {
                out << "nan";
            } else {
                out << row[i];
            }
        }
        out << '\n';
    }
}

nlohmann::json summary_document(const ExperimentResult &result) {
    nlohmann::json doc;
    doc["schema_version"] = kSummarySchemaVersion;
    doc["experiment"] = name(result.experiment);
    doc["passed"] = result.passed();
    nlohmann::json checks = nlohmann::json::array();
    nlohmann::json failures = nlohmann::json::array();
    for (const auto &c : result.checks) {
        checks.push_back({{"name", c.name},
                          {"passed", c.passed},
                          {"measured", finite_or_null(c.measured)},
                          {"expected", finite_or_null(c.expected)},
                          {"tolerance", finite_or_null(c.tolerance)},
                          {"detail", c.detail}});
        if (!c.passed) {
            failures.push_back(c.name);
        }
    }
    doc["checks"] = std::move(checks);
    doc["failures"] = std::move(failures);
    doc["results"] = result.summary;
    return doc;
}

nlohmann::json manifest_document(const ExperimentConfig &config) {
    nlohmann::json doc;
    doc["schema_version"] = kSummarySchemaVersion;
    doc["version"] = library_version();
    doc["config"] = to_json(config);
    doc["seed"] = config.seed;
    return doc;
}

void write_outputs(const ExperimentResult &result, const ExperimentConfig &config, const std::string &dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw ResourceError("cannot create output directory " + dir + ": " + ec.message());
    }
    const fs::path root(dir);
    write_file(root / "summary.json", summary_document(result).dump(2) + "\n");
    write_file(root / "manifest.json", manifest_document(config).dump(2) + "\n");
    for (const auto &table : result.tables) {
        std::ofstream out(root / table.file);
        if (!out) {
            throw ResourceError("cannot write " + (root / table.file).string());
        }
        write_table_csv(out, table);
    }
    for (const auto &[file, contents] : result.files) {
        write_file(root / file, contents);
    }
}

} // namespace qntk::experiments
