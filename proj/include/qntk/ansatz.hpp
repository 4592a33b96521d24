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

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

#include "qntk/dense_operator.hpp"
#include "qntk/pauli.hpp"
#include "qntk/rng.hpp"

namespace qntk {

/// Trainable rotation angles in radians, one per layer.
class AngleVector {
  public:
    AngleVector() = default;
    explicit AngleVector(std::vector<double> values) : values_(std::move(values)) {}
    explicit AngleVector(std::size_t size, double value = 0.0) : values_(size, value) {}

    /// i.i.d. uniform on [0, 2 pi).
    static AngleVector random_uniform(std::size_t size, Rng &rng);

    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    double &operator[](std::size_t i) { return values_[i]; }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    bool operator==(const AngleVector &) const = default;

  private:
    std::vector<double> values_;
};

/// One layer W exp(i theta X): the rotation acts first, then the fixed unitary.
struct AnsatzLayer {
    LocalUnitary entangler;
    PauliString generator;
};

/// V_minus covers layers 1..ell (applied first), V_plus layers ell+1..L,
/// so that V_plus * V_minus = U(theta).
struct SplitCircuit {
    DenseOperator v_minus;
    DenseOperator v_plus;
};

/// U(theta) = prod_l W_l exp(i theta_l X_l), layer 1 acting first on the state.
class LayeredAnsatz {
  public:
    /// Dense copies of the entanglers are kept for n_qubits up to this value.
    static constexpr int kDenseCacheQubits = 6;

    /// Throws OperatorError for a non-unitary block or identity generator,
    /// DimensionError for inconsistent qubit counts.
    LayeredAnsatz(int n_qubits, std::vector<AnsatzLayer> layers, Seed construction_seed = 0);

    int n_qubits() const { return n_qubits_; }
    std::size_t dim() const { return std::size_t{1} << n_qubits_; }
    std::size_t depth() const { return layers_.size(); }
    const std::vector<AnsatzLayer> &layers() const { return layers_; }
    const AnsatzLayer &layer(std::size_t index) const { return layers_.at(index); }
    Seed construction_seed() const { return seed_; }

    /// Full N x N entangler of layer `index` (0-based).
    ComplexMatrix dense_entangler(std::size_t index) const;

    /// W_l exp(i theta X_l) on `state`, 0-based layer index.
    void apply_layer(StateVector &state, std::size_t index, double theta) const;
    /// Inverse of apply_layer.
    void apply_layer_adjoint(StateVector &state, std::size_t index, double theta) const;

    /// U(theta)|psi0>
    StateVector evaluate(const AngleVector &theta, const StateVector &psi0) const;

    /// Dense W_l exp(i theta X_l).
    ComplexMatrix layer_matrix(std::size_t index, double theta) const;
    /// Dense U(theta).
    DenseOperator unitary(const AngleVector &theta) const;

    /// 1-based split; throws std::out_of_range unless 1 <= ell <= L.
    SplitCircuit split_at(const AngleVector &theta, std::size_t ell) const;

    void check_angles(const AngleVector &theta) const;

  private:
    int n_qubits_;
    std::vector<AnsatzLayer> layers_;
    std::vector<ComplexMatrix> dense_cache_;
    Seed seed_;
};

/// Randomized hardware-efficient ansatz. Layer l rotates about a uniformly
/// random single-qubit Pauli on wire (l mod n); its entangler is a Haar
/// two-qubit unitary on a random ring-adjacent pair (Haar one-qubit for n = 1).
LayeredAnsatz build_randomized_hwe(int n_qubits, std::size_t layers, Seed seed);

nlohmann::json to_json(const LayeredAnsatz &ansatz);
LayeredAnsatz ansatz_from_json(const nlohmann::json &doc);

} // namespace qntk
