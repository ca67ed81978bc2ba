// Copyright 2026 The SeqTruth Authors.
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

#ifndef SEQTRUTH_ERROR_H_
#define SEQTRUTH_ERROR_H_

#include <stdexcept>
#include <string>

namespace seqtruth {

// Base of every error raised by the library. The CLI maps the concrete
// subclasses onto exit codes (data errors 2, numerical failures 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input that cannot be parsed at all (bad JSON, bad column layout).
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Input that parses but violates a data-model invariant.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Worker files whose token columns disagree.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

// Non-finite objective or similar breakdown of the optimizer.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Bad arguments handed to a library function.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace seqtruth

#endif  // SEQTRUTH_ERROR_H_
