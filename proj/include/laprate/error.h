// Copyright 2026 The laprate Authors
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

#ifndef LAPRATE_ERROR_H_
#define LAPRATE_ERROR_H_

#include <stdexcept>
#include <string>

namespace laprate {

enum class ErrorCode {
  kInvalidArgument,  // shape, domain, Q, QP, tau, ...
  kParameterBound,   // |A g|_k exceeds the exponent bound
  kNotSpd,           // Cholesky failed
  kNotConverged,     // Newton did not reach the gradient tolerance
  kOverflow,         // level magnitude too large for the codelength oracle
  kFormat,           // block dump / record parsing
  kIo,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kParameterBound: return "parameter-bound";
    case ErrorCode::kNotSpd: return "not-spd";
    case ErrorCode::kNotConverged: return "not-converged";
    case ErrorCode::kOverflow: return "overflow";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void check_arg(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::kInvalidArgument, what);
}

}  // namespace laprate

#endif  // LAPRATE_ERROR_H_
