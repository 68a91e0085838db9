// Copyright 2026 The hybridmem Authors
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

namespace hybridmem {

/// Invalid argument or violated precondition (bad dimensions, out-of-range parameters).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical invariant failed during a computation.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Integrator diagnostics breached their abort thresholds at `time`.
class DiagnosticBreach : public NumericalError {
public:
    DiagnosticBreach(const std::string& what, double time)
        : NumericalError(what + " at t = " + std::to_string(time)), time_(time) {}
    double time() const { return time_; }

private:
    double time_;
};

/// Projective measurement on a branch with negligible probability.
class MeasurementError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace hybridmem
