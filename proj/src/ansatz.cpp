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

#include "qntk/ansatz.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "qntk/error.hpp"
#include "qntk/haar.hpp"

namespace qntk {

AngleVector AngleVector::random_uniform(std::size_t size, Rng &rng) {
    std::vector<double> v(size);
    for (auto &x : v) {
        x = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
    return AngleVector(std::move(v));
}

LayeredAnsatz::LayeredAnsatz(int n_qubits, std::vector<AnsatzLayer> layers, Seed construction_seed)
    : n_qubits_(n_qubits), layers_(std::move(layers)), seed_(construction_seed) {
    if (n_qubits < 1 || n_qubits > kMaxStateQubits) {
        throw DimensionError("ansatz qubit count out of range");
    }
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto &layer = layers_[l];
        require_same_qubits(n_qubits_, layer.generator.n_qubits(), "ansatz generator");
        if (layer.generator.is_identity()) {
            throw OperatorError("layer " + std::to_string(l + 1) + " has an identity generator");
        }
        for (int w : layer.entangler.wires) {
            if (w < 0 || w >= n_qubits_) {
                throw DimensionError("layer " + std::to_string(l + 1) + " entangler wire out of range");
            }
        }
        const auto sub = Eigen::Index{1} << layer.entangler.wires.size();
        if (layer.entangler.block.rows() != sub || layer.entangler.block.cols() != sub) {
            throw DimensionError("layer " + std::to_string(l + 1) + " entangler block shape mismatch");
        }
        if (unitarity_defect(layer.entangler.block) > DenseOperator::kUnitaryTolerance) {
            throw OperatorError("layer " + std::to_string(l + 1) + " entangler is not unitary");
        }
        if (n_qubits_ <= kDenseCacheQubits) {
            dense_cache_.push_back(layer.entangler.embed(n_qubits_));
        }
    }
}

ComplexMatrix LayeredAnsatz::dense_entangler(std::size_t index) const {
    if (index < dense_cache_.size()) {
        return dense_cache_[index];
    }
    return layers_.at(index).entangler.embed(n_qubits_);
}

void LayeredAnsatz::apply_layer(StateVector &state, std::size_t index, double theta) const {
    const auto &layer = layers_[index];
    apply_pauli_rotation_inplace(state, layer.generator, theta);
    apply_local_inplace(state, layer.entangler);
}

void LayeredAnsatz::apply_layer_adjoint(StateVector &state, std::size_t index, double theta) const {
    const auto &layer = layers_[index];
    apply_local_inplace(state, layer.entangler.adjoint());
    apply_pauli_rotation_inplace(state, layer.generator, -theta);
}

void LayeredAnsatz::check_angles(const AngleVector &theta) const {
    if (theta.size() != layers_.size()) {
        throw DimensionError("angle vector has " + std::to_string(theta.size()) +
                             " entries for " + std::to_string(layers_.size()) + " layers");
    }
}

StateVector LayeredAnsatz::evaluate(const AngleVector &theta, const StateVector &psi0) const {
    check_angles(theta);
    require_same_qubits(n_qubits_, psi0.n_qubits(), "evaluate");
    StateVector state = psi0;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        apply_layer(state, l, theta[l]);
    }
    return state;
}

ComplexMatrix LayeredAnsatz::layer_matrix(std::size_t index, double theta) const {
    const auto &layer = layers_.at(index);
    const auto n = static_cast<Eigen::Index>(dim());
    const ComplexMatrix rotation = std::cos(theta) * ComplexMatrix::Identity(n, n) +
                                   Complex{0.0, std::sin(theta)} * layer.generator.to_dense();
    return dense_entangler(index) * rotation;
}

DenseOperator LayeredAnsatz::unitary(const AngleVector &theta) const {
    check_angles(theta);
    ComplexMatrix u = ComplexMatrix::Identity(static_cast<Eigen::Index>(dim()), static_cast<Eigen::Index>(dim()));
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        u = layer_matrix(l, theta[l]) * u;
    }
    return DenseOperator::unitary(n_qubits_, std::move(u));
}

SplitCircuit LayeredAnsatz::split_at(const AngleVector &theta, std::size_t ell) const {
    check_angles(theta);
    if (ell < 1 || ell > layers_.size()) {
        throw std::out_of_range("split index " + std::to_string(ell) + " outside [1, " +
                                std::to_string(layers_.size()) + "]");
    }
    const auto n = static_cast<Eigen::Index>(dim());
    ComplexMatrix minus = ComplexMatrix::Identity(n, n);
    ComplexMatrix plus = ComplexMatrix::Identity(n, n);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        if (l < ell) {
            minus = layer_matrix(l, theta[l]) * minus;
        } else {
            plus = layer_matrix(l, theta[l]) * plus;
        }
    }
    return {DenseOperator::unitary(n_qubits_, std::move(minus)),
            DenseOperator::unitary(n_qubits_, std::move(plus))};
}

LayeredAnsatz build_randomized_hwe(int n_qubits, std::size_t layers, Seed seed) {
    if (n_qubits < 1 || layers < 1) {
        throw DimensionError("build_randomized_hwe needs n_qubits >= 1 and L >= 1");
    }
    constexpr std::array<Pauli, 3> kAxes = {Pauli::X, Pauli::Y, Pauli::Z};
    Rng rng(seed);
    std::vector<AnsatzLayer> built;
    built.reserve(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        const int wire = static_cast<int>(l % static_cast<std::size_t>(n_qubits));
        const Pauli axis = kAxes[rng.index(3)];
        LocalUnitary entangler;
        if (n_qubits == 1) {
            entangler.wires = {0};
        } else if (n_qubits == 2) {
            entangler.wires = {0, 1};
        } else {
            const int q = static_cast<int>(rng.index(static_cast<std::uint64_t>(n_qubits)));
            entangler.wires = {q, (q + 1) % n_qubits};
        }
        entangler.block = haar_matrix(std::size_t{1} << entangler.wires.size(), rng);
        built.push_back({std::move(entangler), PauliString::single(n_qubits, wire, axis)});
    }
    return LayeredAnsatz(n_qubits, std::move(built), seed);
}

nlohmann::json to_json(const LayeredAnsatz &ansatz) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto &layer : ansatz.layers()) {
        nlohmann::json block = nlohmann::json::array();
        const auto &b = layer.entangler.block;
        for (Eigen::Index r = 0; r < b.rows(); ++r) {
            for (Eigen::Index c = 0; c < b.cols(); ++c) {
                block.push_back({b(r, c).real(), b(r, c).imag()});
            }
        }
        layers.push_back({{"wires", layer.entangler.wires},
                          {"pauli", layer.generator.label()},
                          {"block", std::move(block)}});
    }
    return {{"format", "qntk.ansatz"},
            {"version", 1},
            {"n_qubits", ansatz.n_qubits()},
            {"L", ansatz.depth()},
            {"seed", ansatz.construction_seed()},
            {"layers", std::move(layers)}};
}

LayeredAnsatz ansatz_from_json(const nlohmann::json &doc) {
    const int n = doc.at("n_qubits").get<int>();
    const auto depth = doc.at("L").get<std::size_t>();
    const auto &layers_doc = doc.at("layers");
    if (layers_doc.size() != depth) {
        throw DimensionError("ansatz document declares L = " + std::to_string(depth) + " but has " +
                             std::to_string(layers_doc.size()) + " layers");
    }
    std::vector<AnsatzLayer> layers;
    for (const auto &ld : layers_doc) {
        LocalUnitary entangler;
        entangler.wires = ld.at("wires").get<std::vector<int>>();
        const auto sub = Eigen::Index{1} << entangler.wires.size();
        const auto &block = ld.at("block");
        if (static_cast<Eigen::Index>(block.size()) != sub * sub) {
            throw DimensionError("entangler block has the wrong number of entries");
        }
        entangler.block.resize(sub, sub);
        for (Eigen::Index k = 0; k < sub * sub; ++k) {
            const auto &pair = block.at(static_cast<std::size_t>(k));
            entangler.block(k / sub, k % sub) = Complex{pair.at(0).get<double>(), pair.at(1).get<double>()};
        }
        layers.push_back({std::move(entangler), PauliString::from_label(ld.at("pauli").get<std::string>())});
    }
    return LayeredAnsatz(n, std::move(layers), doc.value("seed", Seed{0}));
}

} // namespace qntk
