// Copyright 2026 The qndmle Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace qndmle {

/// Argument outside the mathematical domain of an operation (parameter
/// outside the box, prefix longer than a trajectory, ...).
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Invalid object at construction time (bad probabilities, non-unitary
/// basis, non-Hermitian generator, malformed weights).
class ConstructionError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// The family lacks a declared capability (e.g. derivatives of a family
/// declared merely continuous).
class CapabilityError : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

/// An observation that has probability zero under the model.
class InferenceError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Experiment refused for numerical reasons (singular Fisher information).
class NumericalRefusal : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Invalid run configuration; the message carries the field or line.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace qndmle
