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

#include "qntk/pauli.hpp"

#include <array>
#include <bit>
#include <cmath>

#include "qntk/error.hpp"

namespace qntk {

namespace {

constexpr std::array<Complex, 4> kIPowers = {Complex{1, 0}, Complex{0, 1}, Complex{-1, 0},
                                             Complex{0, -1}};

Complex i_power(int k) { return kIPowers[static_cast<std::size_t>(((k % 4) + 4) % 4)]; }

} // namespace

char to_char(Pauli p) {
    switch (p) {
    case Pauli::I:
        return 'I';
    case Pauli::X:
        return 'X';
    case Pauli::Y:
        return 'Y';
    case Pauli::Z:
        return 'Z';
    }
    return '?';
}

Pauli pauli_from_char(char c) {
    switch (c) {
    case 'I':
    case 'i':
        return Pauli::I;
    case 'X':
    case 'x':
        return Pauli::X;
    case 'Y':
    case 'y':
        return Pauli::Y;
    case 'Z':
    case 'z':
        return Pauli::Z;
    default:
        throw std::invalid_argument(std::string("invalid Pauli label '") + c + "'");
    }
}

PauliString::PauliString(int n_qubits) : n_qubits_(n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxStateQubits) {
        throw DimensionError("Pauli string qubit count out of range");
    }
}

PauliString PauliString::from_label(std::string_view label) {
    PauliString p(static_cast<int>(label.size()));
    for (std::size_t q = 0; q < label.size(); ++q) {
        p.set(static_cast<int>(q), pauli_from_char(label[q]));
    }
    return p;
}

PauliString PauliString::single(int n_qubits, int qubit, Pauli kind) {
    PauliString p(n_qubits);
    p.set(qubit, kind);
    return p;
}

Pauli PauliString::at(int qubit) const {
    const bool x = (x_mask_ >> qubit) & 1U;
    const bool z = (z_mask_ >> qubit) & 1U;
    if (x && z) {
        return Pauli::Y;
    }
    if (x) {
        return Pauli::X;
    }
    return z ? Pauli::Z : Pauli::I;
}

void PauliString::set(int qubit, Pauli p) {
    if (qubit < 0 || qubit >= n_qubits_) {
        throw DimensionError("Pauli qubit index out of range");
    }
    const std::uint64_t bit = std::uint64_t{1} << qubit;
    x_mask_ &= ~bit;
    z_mask_ &= ~bit;
    if (p == Pauli::X || p == Pauli::Y) {
        x_mask_ |= bit;
    }
    if (p == Pauli::Z || p == Pauli::Y) {
        z_mask_ |= bit;
    }
}

int PauliString::y_count() const { return std::popcount(x_mask_ & z_mask_); }

// X|b> = |~b>, Y|b> = i(-1)^b |~b>, Z|b> = (-1)^b |b>.
Complex PauliString::phase(std::uint64_t basis_index) const {
    const int sign_flips = std::popcount(basis_index & z_mask_);
    return i_power(y_count() + 2 * sign_flips);
}

std::string PauliString::label() const {
    std::string s(static_cast<std::size_t>(n_qubits_), 'I');
    for (int q = 0; q < n_qubits_; ++q) {
        s[static_cast<std::size_t>(q)] = to_char(at(q));
    }
    return s;
}

double PauliString::trace() const { return is_identity() ? static_cast<double>(dim()) : 0.0; }

bool PauliString::commutes_with(const PauliString &other) const {
    const int overlap = std::popcount(x_mask_ & other.z_mask_) + std::popcount(z_mask_ & other.x_mask_);
    return overlap % 2 == 0;
}

ComplexMatrix PauliString::to_dense() const {
    const auto n = static_cast<Eigen::Index>(dim());
    ComplexMatrix m = ComplexMatrix::Zero(n, n);
    for (std::uint64_t b = 0; b < dim(); ++b) {
        m(static_cast<Eigen::Index>(b ^ x_mask_), static_cast<Eigen::Index>(b)) = phase(b);
    }
    return m;
}

std::pair<Complex, PauliString> multiply(const PauliString &a, const PauliString &b) {
    require_same_qubits(a.n_qubits(), b.n_qubits(), "Pauli product");
    // Write P = i^{y} X^x Z^z. Then (X^xa Z^za)(X^xb Z^zb) = (-1)^{|za & xb|} X^(xa^xb) Z^(za^zb).
    PauliString out(a.n_qubits());
    const std::uint64_t x = a.x_mask() ^ b.x_mask();
    const std::uint64_t z = a.z_mask() ^ b.z_mask();
    for (int q = 0; q < a.n_qubits(); ++q) {
        const bool xq = (x >> q) & 1U;
        const bool zq = (z >> q) & 1U;
        out.set(q, xq ? (zq ? Pauli::Y : Pauli::X) : (zq ? Pauli::Z : Pauli::I));
    }
    const int k = a.y_count() + b.y_count() - out.y_count() +
                  2 * std::popcount(a.z_mask() & b.x_mask());
    return {i_power(k), out};
}

StateVector apply_pauli(const StateVector &state, const PauliString &p) {
    require_same_qubits(p.n_qubits(), state.n_qubits(), "apply_pauli");
    StateVector out = state;
    auto src = state.amplitudes();
    auto dst = out.amplitudes();
    for (std::uint64_t b = 0; b < src.size(); ++b) {
        dst[b ^ p.x_mask()] = p.phase(b) * src[b];
    }
    return out;
}

void apply_pauli_rotation_inplace(StateVector &state, const PauliString &p, double theta) {
    require_same_qubits(p.n_qubits(), state.n_qubits(), "apply_pauli_rotation");
    const double c = std::cos(theta);
    const Complex is{0.0, std::sin(theta)};
    auto amps = state.amplitudes();
    const std::uint64_t x = p.x_mask();
    if (x == 0) {
        for (std::uint64_t b = 0; b < amps.size(); ++b) {
            amps[b] *= c + is * p.phase(b);
        }
        return;
    }
    // Pairs (b, b ^ x) with b the member whose highest set bit of x is clear.
    const std::uint64_t top = std::uint64_t{1} << (63 - std::countl_zero(x));
    for (std::uint64_t b = 0; b < amps.size(); ++b) {
        if (b & top) {
            continue;
        }
        const std::uint64_t partner = b ^ x;
        const Complex a0 = amps[b];
        const Complex a1 = amps[partner];
        amps[b] = c * a0 + is * p.phase(partner) * a1;
        amps[partner] = c * a1 + is * p.phase(b) * a0;
    }
}

StateVector apply_pauli_rotation(const StateVector &state, const PauliString &p, double theta) {
    StateVector out = state;
    apply_pauli_rotation_inplace(out, p, theta);
    return out;
}

double pauli_expectation(const StateVector &state, const PauliString &p) {
    require_same_qubits(p.n_qubits(), state.n_qubits(), "pauli_expectation");
    auto amps = state.amplitudes();
    Complex acc{0.0, 0.0};
    for (std::uint64_t b = 0; b < amps.size(); ++b) {
        acc += std::conj(amps[b ^ p.x_mask()]) * p.phase(b) * amps[b];
    }
    return acc.real();
}

} // namespace qntk
