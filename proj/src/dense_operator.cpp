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

#include "qntk/dense_operator.hpp"

#include <array>
#include <string>

#include "qntk/error.hpp"

namespace qntk {

namespace {

void check_shape(int n_qubits, const ComplexMatrix &m) {
    if (n_qubits < 1 || n_qubits > kMaxDenseQubits) {
        throw ResourceError("dense operator on " + std::to_string(n_qubits) +
                            " qubits exceeds the dense size guard");
    }
    const auto n = Eigen::Index{1} << n_qubits;
    if (m.rows() != n || m.cols() != n) {
        throw DimensionError("dense operator shape does not match 2^" + std::to_string(n_qubits));
    }
}

} // namespace

double unitarity_defect(const ComplexMatrix &m) {
    const ComplexMatrix d = m * m.adjoint() - ComplexMatrix::Identity(m.rows(), m.cols());
    return d.cwiseAbs().maxCoeff();
}

double hermiticity_defect(const ComplexMatrix &m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

DenseOperator::DenseOperator(int n_qubits, ComplexMatrix matrix)
    : n_qubits_(n_qubits), matrix_(std::move(matrix)) {
    check_shape(n_qubits_, matrix_);
}

DenseOperator DenseOperator::unitary(int n_qubits, ComplexMatrix matrix) {
    DenseOperator op(n_qubits, std::move(matrix));
    if (unitarity_defect(op.matrix_) > kUnitaryTolerance) {
        throw OperatorError("matrix is not unitary within tolerance");
    }
    op.unitary_ = true;
    return op;
}

DenseOperator DenseOperator::hermitian(int n_qubits, ComplexMatrix matrix) {
    DenseOperator op(n_qubits, std::move(matrix));
    if (hermiticity_defect(op.matrix_) > kHermitianTolerance) {
        throw OperatorError("matrix is not Hermitian within tolerance");
    }
    op.hermitian_ = true;
    return op;
}

DenseOperator DenseOperator::identity(int n_qubits) {
    const auto n = Eigen::Index{1} << n_qubits;
    DenseOperator op(n_qubits, ComplexMatrix::Identity(n, n));
    op.unitary_ = true;
    op.hermitian_ = true;
    return op;
}

DenseOperator DenseOperator::adjoint() const {
    DenseOperator op(n_qubits_, matrix_.adjoint());
    op.unitary_ = unitary_;
    op.hermitian_ = hermitian_;
    return op;
}

DenseOperator DenseOperator::operator*(const DenseOperator &rhs) const {
    require_same_qubits(n_qubits_, rhs.n_qubits_, "operator product");
    DenseOperator op(n_qubits_, matrix_ * rhs.matrix_);
    op.unitary_ = unitary_ && rhs.unitary_;
    return op;
}

StateVector apply_dense(const StateVector &state, const DenseOperator &u) {
    require_same_qubits(u.n_qubits(), state.n_qubits(), "apply_dense");
    if (!u.is_unitary()) {
        throw OperatorError("apply_dense requires an operator flagged unitary");
    }
    const auto amps = state.amplitudes();
    const Eigen::Map<const ComplexVector> in(amps.data(), static_cast<Eigen::Index>(amps.size()));
    const ComplexVector out = u.matrix() * in;
    StateVector result = state;
    auto dst = result.amplitudes();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        dst[i] = out(static_cast<Eigen::Index>(i));
    }
    return result;
}

ComplexMatrix LocalUnitary::embed(int n_qubits) const {
    if (n_qubits > kMaxDenseQubits) {
        throw ResourceError("embedding exceeds the dense size guard");
    }
    const std::uint64_t dim = std::uint64_t{1} << n_qubits;
    std::uint64_t wire_mask = 0;
    for (int w : wires) {
        wire_mask |= std::uint64_t{1} << w;
    }
    auto local_index = [&](std::uint64_t b) {
        std::uint64_t k = 0;
        for (std::size_t j = 0; j < wires.size(); ++j) {
            k |= ((b >> wires[j]) & 1U) << j;
        }
        return static_cast<Eigen::Index>(k);
    };
    ComplexMatrix m = ComplexMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::uint64_t r = 0; r < dim; ++r) {
        for (std::uint64_t c = 0; c < dim; ++c) {
            if ((r & ~wire_mask) == (c & ~wire_mask)) {
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                    block(local_index(r), local_index(c));
            }
        }
    }
    return m;
}

void apply_local_inplace(StateVector &state, const LocalUnitary &gate) {
    const std::size_t k = gate.wires.size();
    const std::size_t sub = std::size_t{1} << k;
    if (k == 0 || k > 6 || gate.block.rows() != static_cast<Eigen::Index>(sub) ||
        gate.block.cols() != static_cast<Eigen::Index>(sub)) {
        throw DimensionError("local gate block does not match its wire count");
    }
    std::uint64_t wire_mask = 0;
    for (int w : gate.wires) {
        if (w < 0 || w >= state.n_qubits()) {
            throw DimensionError("local gate wire out of range");
        }
        wire_mask |= std::uint64_t{1} << w;
    }
    std::array<std::uint64_t, 64> offsets{};
    for (std::size_t m = 0; m < sub; ++m) {
        std::uint64_t off = 0;
        for (std::size_t j = 0; j < k; ++j) {
            off |= ((m >> j) & 1U) << gate.wires[j];
        }
        offsets[m] = off;
    }
    auto amps = state.amplitudes();
    std::array<Complex, 64> in{};
    for (std::uint64_t base = 0; base < amps.size(); ++base) {
        if (base & wire_mask) {
            continue;
        }
        for (std::size_t m = 0; m < sub; ++m) {
            in[m] = amps[base | offsets[m]];
        }
        for (std::size_t r = 0; r < sub; ++r) {
            Complex acc{0.0, 0.0};
            for (std::size_t c = 0; c < sub; ++c) {
                acc += gate.block(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * in[c];
            }
            amps[base | offsets[r]] = acc;
        }
    }
}

} // namespace qntk
