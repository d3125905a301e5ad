// Copyright 2026 The lion-forge Authors
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

namespace lion_forge {

// Bad argument to a pure operation (n < 1, P outside (0,1], ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent input data. Maps to CLI exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input file parse failure carrying "path:line" location.
class LoadError : public ValidationError {
 public:
  LoadError(const std::string& path, std::size_t line, const std::string& what)
      : ValidationError(path + ":" + std::to_string(line) + ": " + what),
        path_(path),
        line_(line) {}

  const std::string& path() const { return path_; }
  std::size_t line() const { return line_; }

 private:
  std::string path_;
  std::size_t line_;
};

// A combo, config or request that would fold CIDEr into MQ.
class HoldOutViolation : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Missing matrix/tensor cells or prediction coverage. Maps to CLI exit code 2.
class IncompleteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lion_forge
