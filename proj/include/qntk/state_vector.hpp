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

#include "qntk/rng.hpp"
#include "qntk/types.hpp"

namespace qntk {

/// Pure state of `n_qubits` qubits. Qubit q is bit q of the basis index.
class StateVector {
  public:
    /// |0...0>
    explicit StateVector(int n_qubits);

    static StateVector basis(int n_qubits, std::size_t index);

    /// Takes ownership of `amplitudes`; throws DimensionError unless the
    /// length is 2^n_qubits and OperatorError unless the norm is 1 within 1e-10.
    static StateVector from_amplitudes(int n_qubits, std::vector<Complex> amplitudes);

    /// Haar-random pure state.
    static StateVector random(int n_qubits, Rng &rng);

    int n_qubits() const { return n_qubits_; }
    std::size_t dim() const { return amplitudes_.size(); }

    std::span<const Complex> amplitudes() const { return amplitudes_; }
    std::span<Complex> amplitudes() { return amplitudes_; }

    const Complex &operator[](std::size_t i) const { return amplitudes_[i]; }
    Complex &operator[](std::size_t i) { return amplitudes_[i]; }

    double norm_squared() const;
    void normalize();

    /// <this|other>
    Complex inner(const StateVector &other) const;

    bool operator==(const StateVector &other) const = default;

  private:
    StateVector(int n_qubits, std::vector<Complex> amplitudes)
        : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {}

    int n_qubits_;
    std::vector<Complex> amplitudes_;
};

void require_same_qubits(int expected, int actual, const char *what);

} // namespace qntk
