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

#include "qntk/observable.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <string>

#include "qntk/error.hpp"

namespace qntk {

namespace {

using MaskKey = std::pair<std::uint64_t, std::uint64_t>;

MaskKey key_of(const PauliString &p) { return {p.x_mask(), p.z_mask()}; }

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t");
    return std::string(s.substr(first, last - first + 1));
}

} // namespace

Observable Observable::pauli_sum(int n_qubits, std::vector<PauliTerm> terms) {
    std::map<MaskKey, PauliTerm> merged;
    for (auto &t : terms) {
        require_same_qubits(n_qubits, t.string.n_qubits(), "Pauli sum term");
        if (!std::isfinite(t.coefficient)) {
            throw OperatorError("non-finite Pauli coefficient");
        }
        auto [it, inserted] = merged.try_emplace(key_of(t.string), t);
        if (!inserted) {
            it->second.coefficient += t.coefficient;
        }
    }
    Observable o;
    o.n_qubits_ = n_qubits;
    for (auto &[key, term] : merged) {
        if (term.coefficient != 0.0) {
            o.terms_.push_back(term);
        }
    }
    return o;
}

Observable Observable::dense(const DenseOperator &op) {
    if (!op.is_hermitian()) {
        throw OperatorError("observable must be flagged Hermitian");
    }
    Observable o;
    o.n_qubits_ = op.n_qubits();
    o.dense_ = op;
    return o;
}

Observable Observable::identity(int n_qubits) {
    return pauli_sum(n_qubits, {{1.0, PauliString(n_qubits)}});
}

Observable Observable::magnetization(int n_qubits) {
    std::vector<PauliTerm> terms;
    for (int q = 0; q < n_qubits; ++q) {
        terms.push_back({1.0, PauliString::single(n_qubits, q, Pauli::Z)});
    }
    return pauli_sum(n_qubits, std::move(terms));
}

Observable Observable::parse(int n_qubits, std::string_view spec) {
    const std::string s = trim(spec);
    if (s == "magnetization") {
        return magnetization(n_qubits);
    }
    if (s == "identity") {
        return identity(n_qubits);
    }
    std::vector<PauliTerm> terms;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto end = s.find('+', start);
        const std::string token = trim(std::string_view(s).substr(start, end - start));
        if (token.empty()) {
            throw ConfigError("empty term in observable '" + s + "'");
        }
        double coef = 1.0;
        std::string label = token;
        if (const auto star = token.find('*'); star != std::string::npos) {
            try {
                coef = std::stod(trim(std::string_view(token).substr(0, star)));
            } catch (const std::exception &) {
                throw ConfigError("bad coefficient in observable term '" + token + "'");
            }
            label = trim(std::string_view(token).substr(star + 1));
        }
        if (label.size() >= 2 && std::all_of(label.begin() + 1, label.end(), [](unsigned char ch) { return std::isdigit(ch); })) {
            // Single-qubit shorthand such as "Z0".
            const int qubit = std::stoi(label.substr(1));
            if (qubit >= n_qubits) {
                throw ConfigError("observable qubit index in '" + label + "' out of range");
            }
            try {
                terms.push_back({coef, PauliString::single(n_qubits, qubit, pauli_from_char(label[0]))});
            } catch (const std::invalid_argument &e) {
                throw ConfigError(e.what());
            }
        } else if (static_cast<int>(label.size()) != n_qubits) {
            throw ConfigError("observable label '" + label + "' does not have " +
                              std::to_string(n_qubits) + " characters");
        } else {
            try {
                terms.push_back({coef, PauliString::from_label(label)});
            } catch (const std::invalid_argument &e) {
                throw ConfigError(e.what());
            }
        }
        if (end == std::string::npos) {
            break;
        }
        start = end + 1;
    }
    return pauli_sum(n_qubits, std::move(terms));
}

StateVector Observable::apply(const StateVector &state) const {
    require_same_qubits(n_qubits_, state.n_qubits(), "observable apply");
    if (dense_) {
        const auto amps = state.amplitudes();
        const Eigen::Map<const ComplexVector> in(amps.data(), static_cast<Eigen::Index>(amps.size()));
        const ComplexVector out = dense_->matrix() * in;
        StateVector result = state;
        auto dst = result.amplitudes();
        for (std::size_t i = 0; i < dst.size(); ++i) {
            dst[i] = out(static_cast<Eigen::Index>(i));
        }
        return result;
    }
    StateVector result = state;
    auto dst = result.amplitudes();
    std::fill(dst.begin(), dst.end(), Complex{0.0, 0.0});
    const auto src = state.amplitudes();
    for (const auto &t : terms_) {
        const std::uint64_t x = t.string.x_mask();
        for (std::uint64_t b = 0; b < src.size(); ++b) {
            dst[b ^ x] += t.coefficient * t.string.phase(b) * src[b];
        }
    }
    return result;
}

ComplexMatrix Observable::to_dense() const {
    if (dense_) {
        return dense_->matrix();
    }
    if (n_qubits_ > kMaxDenseQubits) {
        throw ResourceError("observable too large to densify");
    }
    const auto n = static_cast<Eigen::Index>(dim());
    ComplexMatrix m = ComplexMatrix::Zero(n, n);
    for (const auto &t : terms_) {
        m += t.coefficient * t.string.to_dense();
    }
    return m;
}

double Observable::norm_bound() const {
    if (dense_) {
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(dense_->matrix(), Eigen::EigenvaluesOnly);
        return es.eigenvalues().cwiseAbs().maxCoeff();
    }
    double s = 0.0;
    for (const auto &t : terms_) {
        s += std::abs(t.coefficient);
    }
    return s;
}

double expectation(const StateVector &state, const Observable &o) {
    require_same_qubits(o.n_qubits(), state.n_qubits(), "expectation");
    const Complex raw = state.inner(o.apply(state));
    if (std::abs(raw.imag()) > 1e-10 * std::max(1.0, o.norm_bound())) {
        throw NumericalError("expectation value has a non-negligible imaginary part");
    }
    return raw.real();
}

double expectation(const StateVector &state, const DenseOperator &o) {
    if (!o.is_hermitian()) {
        throw OperatorError("expectation requires a Hermitian operator");
    }
    return expectation(state, Observable::dense(o));
}

TracePowers trace_powers(const Observable &o) {
    if (!o.is_pauli_sum()) {
        return trace_powers(DenseOperator::hermitian(o.n_qubits(), o.to_dense()));
    }
    const double n = static_cast<double>(o.dim());
    TracePowers t;
    std::map<MaskKey, Complex> square;
    for (const auto &a : o.terms()) {
        if (a.string.is_identity()) {
            t.tr1 += n * a.coefficient;
        }
        t.tr2 += n * a.coefficient * a.coefficient;
        for (const auto &b : o.terms()) {
            auto [phase, p] = multiply(a.string, b.string);
            square[key_of(p)] += a.coefficient * b.coefficient * phase;
        }
    }
    // O^2 = sum_k d_k P_k with orthogonal P_k, so Tr(O^4) = N sum |d_k|^2.
    for (const auto &[key, d] : square) {
        t.tr4 += n * std::norm(d);
    }
    return t;
}

TracePowers trace_powers(const DenseOperator &o) {
    if (!o.is_hermitian()) {
        throw OperatorError("trace_powers requires a Hermitian operator");
    }
    const ComplexMatrix &m = o.matrix();
    const ComplexMatrix m2 = m * m;
    return {m.trace().real(), m2.trace().real(), (m2 * m2).trace().real()};
}

} // namespace qntk
