// Copyright 2026 The gawqed Authors
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

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace gawqed {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Cyclic frequency (Hz) to angular frequency (rad/s).
constexpr double angular(double hz) { return kTwoPi * hz; }
/// Angular frequency (rad/s) to cyclic frequency (Hz).
constexpr double cyclic(double rad_per_s) { return rad_per_s / kTwoPi; }

/// A precondition on a numeric argument was violated (non-positive
/// frequency, out-of-range target, unknown atom, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// User-supplied configuration is inconsistent or malformed.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed to meet its own accuracy contract.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Severity { kWarning, kError };

struct Diagnostic {
  Severity severity = Severity::kWarning;
  std::string code;
  std::string message;
};

inline bool has_errors(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags) {
    if (d.severity == Severity::kError) return true;
  }
  return false;
}

inline void require_positive_frequency(double omega, const char* what) {
  if (!(omega > 0.0) || !std::isfinite(omega)) {
    throw DomainError(std::string(what) + " must be a positive finite angular frequency");
  }
}

}  // namespace gawqed
