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

#include <vector>

#include "qntk/state_vector.hpp"
#include "qntk/types.hpp"

namespace qntk {

/// N x N complex operator on n qubits, optionally certified unitary or
/// Hermitian at construction.
class DenseOperator {
  public:
    static constexpr double kUnitaryTolerance = 1e-10;
    static constexpr double kHermitianTolerance = 1e-12;

    /// Unchecked general operator.
    DenseOperator(int n_qubits, ComplexMatrix matrix);

    /// Throws OperatorError unless U U^dagger = I within kUnitaryTolerance.
    static DenseOperator unitary(int n_qubits, ComplexMatrix matrix);
    /// Throws OperatorError unless M = M^dagger within kHermitianTolerance.
    static DenseOperator hermitian(int n_qubits, ComplexMatrix matrix);
    static DenseOperator identity(int n_qubits);

    int n_qubits() const { return n_qubits_; }
    std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }
    const ComplexMatrix &matrix() const { return matrix_; }
    bool is_unitary() const { return unitary_; }
    bool is_hermitian() const { return hermitian_; }

    DenseOperator adjoint() const;

    /// this * rhs; the unitary flag survives when both factors carry it.
    DenseOperator operator*(const DenseOperator &rhs) const;

  private:
    int n_qubits_;
    ComplexMatrix matrix_;
    bool unitary_ = false;
    bool hermitian_ = false;
};

/// max_ij |(A A^dagger - I)_ij|
double unitarity_defect(const ComplexMatrix &m);
/// max_ij |A_ij - conj(A_ji)|
double hermiticity_defect(const ComplexMatrix &m);

/// u * |psi>; requires the unitary flag and matching dimensions.
StateVector apply_dense(const StateVector &state, const DenseOperator &u);

/// Unitary acting on an ordered subset of wires. Local basis index bit k
/// corresponds to wires[k].
struct LocalUnitary {
    std::vector<int> wires;
    ComplexMatrix block;

    LocalUnitary adjoint() const { return {wires, block.adjoint()}; }

    /// Embed into the full 2^n x 2^n space.
    ComplexMatrix embed(int n_qubits) const;
};

/// Applies `gate` in place in O(N * 2^k) for a k-wire gate.
void apply_local_inplace(StateVector &state, const LocalUnitary &gate);

} // namespace qntk
