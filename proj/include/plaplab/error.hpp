/*
 *  Copyright 2026 The plaplab Authors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace plaplab {

enum class ErrorKind {
  out_of_domain,
  invalid_exponent,
  invalid_parameter,
  invalid_domain,
  oracle_verification,
  shape_mismatch,
  solver_failure,
  invalid_test_function,
  invalid_support,
  invalid_cutoff,
  wrong_regime,
  precondition,
  invalid_plan,
  io,
  parse,
  config,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::out_of_domain: return "out-of-domain";
    case ErrorKind::invalid_exponent: return "invalid-exponent";
    case ErrorKind::invalid_parameter: return "invalid-parameter";
    case ErrorKind::invalid_domain: return "invalid-domain";
    case ErrorKind::oracle_verification: return "oracle-verification";
    case ErrorKind::shape_mismatch: return "shape-mismatch";
    case ErrorKind::solver_failure: return "solver-failure";
    case ErrorKind::invalid_test_function: return "invalid-test-function";
    case ErrorKind::invalid_support: return "invalid-support";
    case ErrorKind::invalid_cutoff: return "invalid-cutoff";
    case ErrorKind::wrong_regime: return "wrong-regime";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::invalid_plan: return "invalid-plan";
    case ErrorKind::io: return "io";
    case ErrorKind::parse: return "parse";
    case ErrorKind::config: return "config";
  }
  return "unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) throw Error(kind, what);
}

}  // namespace plaplab
