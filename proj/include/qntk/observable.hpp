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

#include <optional>
#include <string_view>
#include <vector>

#include "qntk/dense_operator.hpp"
#include "qntk/pauli.hpp"

namespace qntk {

struct PauliTerm {
    double coefficient;
    PauliString string;
};

/// Exact traces of a Hermitian operator used by the averaged-kernel formulas.
struct TracePowers {
    double tr1 = 0.0; ///< Tr(O)
    double tr2 = 0.0; ///< Tr(O^2)
    double tr4 = 0.0; ///< Tr(O^4)
};

/// Hermitian observable, either a real-weighted Pauli sum or a dense matrix.
class Observable {
  public:
    /// Duplicate strings are merged; zero terms dropped.
    static Observable pauli_sum(int n_qubits, std::vector<PauliTerm> terms);
    static Observable pauli(const PauliString &p) { return pauli_sum(p.n_qubits(), {{1.0, p}}); }
    static Observable dense(const DenseOperator &op);
    static Observable identity(int n_qubits);
    /// sum_q Z_q
    static Observable magnetization(int n_qubits);

    /// Parses "magnetization", "identity", or a '+'-separated list of
    /// terms "[coef*]LABEL" with labels as in PauliString::from_label. A label
    /// like "Z0" names a single-qubit Pauli on that qubit.
    static Observable parse(int n_qubits, std::string_view spec);

    int n_qubits() const { return n_qubits_; }
    std::size_t dim() const { return std::size_t{1} << n_qubits_; }
    bool is_pauli_sum() const { return !dense_.has_value(); }
    const std::vector<PauliTerm> &terms() const { return terms_; }

    /// O|psi>
    StateVector apply(const StateVector &state) const;

    ComplexMatrix to_dense() const;

    /// Upper bound on the operator norm (sum |c| for Pauli sums).
    double norm_bound() const;

  private:
    int n_qubits_ = 0;
    std::vector<PauliTerm> terms_;
    std::optional<DenseOperator> dense_;
};

/// <psi|O|psi>. Throws DimensionError on a qubit mismatch and
/// NumericalError if the imaginary residue exceeds 1e-10 * max(1, ||O||).
double expectation(const StateVector &state, const Observable &o);

/// Dense-operator overload; throws OperatorError unless flagged Hermitian.
double expectation(const StateVector &state, const DenseOperator &o);

TracePowers trace_powers(const Observable &o);
TracePowers trace_powers(const DenseOperator &o);

} // namespace qntk
