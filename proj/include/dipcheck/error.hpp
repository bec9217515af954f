// Copyright 2026 The dipcheck Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dipcheck {

// Stable error codes. The string forms are part of the CLI report schema.
enum class ErrorCode {
  kDeterminismViolation,
  kOutputDistinctionViolation,
  kInitializationViolation,
  kNonInputViolation,
  kDanglingReference,
  kDuplicateStateId,
  kNegativeScale,
  kDegenerateScale,
  kUndeclaredSymbol,
  kUnknownBuiltin,
  kSyntaxError,
  kSchemaError,
  kNoSuchTransition,
  kInputKindMismatch,
  kBadInterval,
  kNonPositiveEpsilon,
  kNonPositiveRate,
  kDivergentTail,
  kWrongWitnessKind,
  kAutomatonIsWellFormed,
  kInvalidArgument,
  kIoError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDeterminismViolation: return "determinism_violation";
    case ErrorCode::kOutputDistinctionViolation: return "output_distinction_violation";
    case ErrorCode::kInitializationViolation: return "initialization_violation";
    case ErrorCode::kNonInputViolation: return "non_input_violation";
    case ErrorCode::kDanglingReference: return "dangling_reference";
    case ErrorCode::kDuplicateStateId: return "duplicate_state_id";
    case ErrorCode::kNegativeScale: return "negative_scale";
    case ErrorCode::kDegenerateScale: return "degenerate_scale";
    case ErrorCode::kUndeclaredSymbol: return "undeclared_symbol";
    case ErrorCode::kUnknownBuiltin: return "unknown_builtin";
    case ErrorCode::kSyntaxError: return "syntax_error";
    case ErrorCode::kSchemaError: return "schema_error";
    case ErrorCode::kNoSuchTransition: return "no_such_transition";
    case ErrorCode::kInputKindMismatch: return "input_kind_mismatch";
    case ErrorCode::kBadInterval: return "bad_interval";
    case ErrorCode::kNonPositiveEpsilon: return "non_positive_epsilon";
    case ErrorCode::kNonPositiveRate: return "non_positive_rate";
    case ErrorCode::kDivergentTail: return "divergent_tail";
    case ErrorCode::kWrongWitnessKind: return "wrong_witness_kind";
    case ErrorCode::kAutomatonIsWellFormed: return "automaton_is_well_formed";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kIoError: return "io_error";
  }
  return "unknown";
}

// One finding, e.g. a single validation violation. `where` names the
// offending state or transition.
struct Diagnostic {
  ErrorCode code;
  std::string where;
  std::string message;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Thrown by validate_or_throw; carries every violation found.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Diagnostic> diagnostics)
      : Error(diagnostics.empty() ? ErrorCode::kInvalidArgument
                                  : diagnostics.front().code,
              summarize(diagnostics)),
        diagnostics_(std::move(diagnostics)) {}

  const std::vector<Diagnostic>& diagnostics() const noexcept {
    return diagnostics_;
  }

 private:
  static std::string summarize(const std::vector<Diagnostic>& diags) {
    std::string out = std::to_string(diags.size()) + " validation error(s)";
    for (const auto& d : diags) {
      out += "\n  ";
      out += to_string(d.code);
      out += " at ";
      out += d.where;
      out += ": ";
      out += d.message;
    }
    return out;
  }

  std::vector<Diagnostic> diagnostics_;
};

}  // namespace dipcheck
