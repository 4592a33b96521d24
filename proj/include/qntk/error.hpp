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

#include <stdexcept>
#include <string>

namespace qntk {

/// Operand sizes disagree (qubit counts, vector lengths, matrix shapes).
class DimensionError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// An operator does not carry the property an operation requires
/// (unitarity, hermiticity, a +-1 spectrum).
class OperatorError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A computation would exceed a configured size or step budget.
class ResourceError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A training run produced non-finite values.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Invalid user configuration.
class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

} // namespace qntk
