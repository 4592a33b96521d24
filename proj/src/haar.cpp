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

#include "qntk/haar.hpp"

#include <cmath>

#include "qntk/error.hpp"

namespace qntk {

ComplexMatrix haar_matrix(std::size_t dim, Rng &rng) {
    const auto n = static_cast<Eigen::Index>(dim);
    ComplexMatrix g(n, n);
    // Column-major fill order is part of the determinism contract.
    for (Eigen::Index c = 0; c < n; ++c) {
        for (Eigen::Index r = 0; r < n; ++r) {
            const double re = rng.normal();
            g(r, c) = Complex{re, rng.normal()} / std::sqrt(2.0);
        }
    }
    Eigen::HouseholderQR<ComplexMatrix> qr(g);
    ComplexMatrix q = qr.householderQ();
    const ComplexMatrix &r = qr.matrixQR();
    for (Eigen::Index j = 0; j < n; ++j) {
        const Complex d = r(j, j);
        const double mag = std::abs(d);
        q.col(j) *= mag > 0.0 ? d / mag : Complex{1.0, 0.0};
    }
    return q;
}

DenseOperator haar_unitary(int n_qubits, Seed seed) {
    if (n_qubits < 1 || n_qubits > kMaxDenseQubits) {
        throw ResourceError("haar_unitary: N = 2^" + std::to_string(n_qubits) +
                            " exceeds the 2^12 guard");
    }
    Rng rng(seed);
    return DenseOperator::unitary(n_qubits, haar_matrix(std::size_t{1} << n_qubits, rng));
}

} // namespace qntk
