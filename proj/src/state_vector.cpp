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

#include "qntk/state_vector.hpp"

#include <cmath>
#include <string>

#include "qntk/error.hpp"

namespace qntk {

namespace {

void check_qubits(int n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxStateQubits) {
        throw DimensionError("qubit count " + std::to_string(n_qubits) +
                             " outside [1, " + std::to_string(kMaxStateQubits) + "]");
    }
}

} // namespace

void require_same_qubits(int expected, int actual, const char *what) {
    if (expected != actual) {
        throw DimensionError(std::string(what) + ": expected " + std::to_string(expected) +
                             " qubits, got " + std::to_string(actual));
    }
}

StateVector::StateVector(int n_qubits) : n_qubits_(n_qubits) {
    check_qubits(n_qubits);
    amplitudes_.assign(std::size_t{1} << n_qubits, Complex{0.0, 0.0});
    amplitudes_[0] = 1.0;
}

StateVector StateVector::basis(int n_qubits, std::size_t index) {
    StateVector s(n_qubits);
    if (index >= s.dim()) {
        throw DimensionError("basis index out of range");
    }
    s.amplitudes_[0] = 0.0;
    s.amplitudes_[index] = 1.0;
    return s;
}

StateVector StateVector::from_amplitudes(int n_qubits, std::vector<Complex> amplitudes) {
    check_qubits(n_qubits);
    if (amplitudes.size() != (std::size_t{1} << n_qubits)) {
        throw DimensionError("amplitude count " + std::to_string(amplitudes.size()) +
                             " is not 2^" + std::to_string(n_qubits));
    }
    StateVector s(n_qubits, std::move(amplitudes));
    if (std::abs(s.norm_squared() - 1.0) > 1e-10) {
        throw OperatorError("state is not normalized");
    }
    return s;
}

StateVector StateVector::random(int n_qubits, Rng &rng) {
    check_qubits(n_qubits);
    std::vector<Complex> amps(std::size_t{1} << n_qubits);
    for (auto &a : amps) {
        const double re = rng.normal();
        a = Complex{re, rng.normal()};
    }
    StateVector s(n_qubits, std::move(amps));
    s.normalize();
    return s;
}

double StateVector::norm_squared() const {
    double acc = 0.0;
    for (const auto &a : amplitudes_) {
        acc += std::norm(a);
    }
    return acc;
}

void StateVector::normalize() {
    const double n = std::sqrt(norm_squared());
    if (n == 0.0) {
        throw NumericalError("cannot normalize the zero vector");
    }
    for (auto &a : amplitudes_) {
        a /= n;
    }
}

Complex StateVector::inner(const StateVector &other) const {
    require_same_qubits(n_qubits_, other.n_qubits_, "inner product");
    Complex acc{0.0, 0.0};
    for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
        acc += std::conj(amplitudes_[i]) * other.amplitudes_[i];
    }
    return acc;
}

} // namespace qntk
