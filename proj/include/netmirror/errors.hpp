// Copyright 2026 The Authors.
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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace netmirror {

// Malformed input file or record. Carries the source name and 1-based line.
class InputError : public std::runtime_error {
 public:
  InputError(std::string source, std::size_t line, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + what),
        source_(std::move(source)),
        line_(line) {}

  const std::string& source() const { return source_; }
  std::size_t line() const { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

// A referenced entity (account, session, node) does not exist.
class NotFoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value is outside its allowed domain (Likert answer 6, p_left 1.3, ...).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An action arrived out of order for the session's state machine.
class OrderingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The action is not available for the session's treatment arm.
class ForbiddenError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical model could not be fitted (rank deficiency, too few rows, ...).
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace netmirror
