// Copyright 2026 The wugbench Authors.
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

#ifndef WUGBENCH_ERROR_HPP_
#define WUGBENCH_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace wugbench {

// Base of all library errors. The CLI maps each subclass to an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad command-line usage or violated call precondition (exit 1).
class UsageError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data (exit 2).
class InputError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss or other numeric breakdown (exit 3).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace wugbench

#endif  // WUGBENCH_ERROR_HPP_
