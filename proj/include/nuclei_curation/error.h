/*
 * Copyright 2026 The Nuclei Curation Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef NUCLEI_CURATION_ERROR_H_
#define NUCLEI_CURATION_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace nuclei_curation {

// Broad failure classes. The CLI maps them to exit codes and the review
// server maps them to HTTP statuses.
enum class ErrorKind {
  kInvalidArgument,  // Malformed or inconsistent data.
  kPrecondition,     // Valid data, but the operation is not allowed now.
  kNotFound,
  kDuplicate,
  kPermission,
  kIo,
};

// Every error raised by the library. `what()` is prefixed with the module
// that raised it, e.g. "mask: run out of bounds".
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string_view module, std::string_view message)
      : std::runtime_error(std::string(module) + ": " + std::string(message)),
        kind_(kind),
        module_(module) {}

  ErrorKind kind() const { return kind_; }
  const std::string& module() const { return module_; }

 private:
  ErrorKind kind_;
  std::string module_;
};

}  // namespace nuclei_curation

#endif  // NUCLEI_CURATION_ERROR_H_
