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

#include "qntk/dense_operator.hpp"
#include "qntk/rng.hpp"

namespace qntk {

/// Haar-distributed dim x dim unitary: QR of a complex Ginibre matrix with
/// the phases of diag(R) folded back into Q.
ComplexMatrix haar_matrix(std::size_t dim, Rng &rng);

/// Haar unitary on n qubits, deterministic in `seed`. Throws ResourceError
/// above kMaxDenseQubits.
DenseOperator haar_unitary(int n_qubits, Seed seed);

} // namespace qntk
