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

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>

#include "qntk/state_vector.hpp"
#include "qntk/types.hpp"

namespace qntk {

enum class Pauli : std::uint8_t { I, X, Y, Z };

char to_char(Pauli p);
Pauli pauli_from_char(char c);

/// Tensor product of single-qubit Paulis, stored as X/Z bit masks.
/// The operator is Hermitian and squares to the identity.
class PauliString {
  public:
    explicit PauliString(int n_qubits);

    /// Character i of `label` acts on qubit i, e.g. "ZIII" is Z on qubit 0.
    static PauliString from_label(std::string_view label);
    static PauliString single(int n_qubits, int qubit, Pauli p);

    int n_qubits() const { return n_qubits_; }
    Pauli at(int qubit) const;
    void set(int qubit, Pauli p);

    bool is_identity() const { return x_mask_ == 0 && z_mask_ == 0; }
    std::uint64_t x_mask() const { return x_mask_; }
    std::uint64_t z_mask() const { return z_mask_; }
    int y_count() const;

    /// Phase p(b) such that P|b> = p(b) |b xor x_mask>.
    Complex phase(std::uint64_t basis_index) const;

    std::string label() const;
    std::size_t dim() const { return std::size_t{1} << n_qubits_; }

    /// Tr(P): N for the identity, 0 otherwise.
    double trace() const;

    bool commutes_with(const PauliString &other) const;

    ComplexMatrix to_dense() const;

    bool operator==(const PauliString &other) const = default;

  private:
    int n_qubits_;
    std::uint64_t x_mask_ = 0;
    std::uint64_t z_mask_ = 0;
};

/// a * b = phase * P, phase in {1, i, -1, -i}.
std::pair<Complex, PauliString> multiply(const PauliString &a, const PauliString &b);

/// P|psi>
StateVector apply_pauli(const StateVector &state, const PauliString &p);

/// exp(i theta P)|psi> = (cos theta + i sin theta P)|psi>, in place.
void apply_pauli_rotation_inplace(StateVector &state, const PauliString &p, double theta);

/// exp(i theta P)|psi>
StateVector apply_pauli_rotation(const StateVector &state, const PauliString &p, double theta);

/// <psi|P|psi> (real because P is Hermitian).
double pauli_expectation(const StateVector &state, const PauliString &p);

} // namespace qntk
