/* Copyright 2026 The bcvad Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef BCVAD_ERROR_HPP_
#define BCVAD_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace bcvad {

enum class ErrorCode {
  kConfig,            // inconsistent parameters or dimensions
  kEmptyInput,        // too little input to do anything
  kInvalidData,       // non-finite samples, out-of-range values
  kInsufficientData,  // fewer frames than an estimator needs
  kUndefined,         // quantity undefined for the input (e.g. SNR without speech)
  kAssembly,          // clip class unreachable
  kInvalidModel,      // non-finite or inconsistent weights
  kData,              // missing corpus files, missing clips
  kFormat,            // malformed WAV / weight / feature file
  kIo,                // filesystem failures
};

const char* ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void Require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) Fail(code, what);
}

}  // namespace bcvad

#endif  // BCVAD_ERROR_HPP_
