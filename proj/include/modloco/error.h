// Copyright 2026 The modloco Authors
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

#ifndef MODLOCO_ERROR_H_
#define MODLOCO_ERROR_H_

#include <stdexcept>
#include <string>

namespace modloco {

// Base class for all errors raised by the library. The concrete subclasses
// mirror the failure categories callers are expected to distinguish.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A body description that cannot be turned into a frame of reference.
class MalformedBodyError : public Error {
 public:
  using Error::Error;
};

// Unknown preset, scenario or benchmark name.
class LookupError : public Error {
 public:
  using Error::Error;
};

// Genome length does not match the controller topology.
class GenomeShapeError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Bad input data (empty traces, NaNs, unparsable files).
class InputError : public Error {
 public:
  using Error::Error;
};

// Gaussian-process covariance could not be factorized.
class FitError : public Error {
 public:
  using Error::Error;
};

// An objective evaluation threw; carries the evaluation index.
class ObjectiveError : public Error {
 public:
  ObjectiveError(int eval_index, const std::string& what)
      : Error("objective failed at evaluation " + std::to_string(eval_index) +
              ": " + what),
        eval_index_(eval_index) {}
  int eval_index() const { return eval_index_; }

 private:
  int eval_index_;
};

}  // namespace modloco

#endif  // MODLOCO_ERROR_H_
