// Copyright 2026 The Evalcard Authors.
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

namespace evalcard {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument violated a documented precondition (bad n-gram order,
/// malformed config, empty corpus where one is required, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Which side of a paired sample made a correlation undefined.
enum class DegenerateSide { kX, kY, kBoth };

inline const char* to_string(DegenerateSide side) {
  switch (side) {
    case DegenerateSide::kX: return "x";
    case DegenerateSide::kY: return "y";
    case DegenerateSide::kBoth: return "both";
  }
  return "?";
}

/// A correlation statistic has no value for the given samples, e.g. one
/// side is constant.
class UndefinedCorrelation : public Error {
 public:
  UndefinedCorrelation(const std::string& statistic, DegenerateSide side)
      : Error(statistic + ": undefined correlation, constant " +
              to_string(side) + " side"),
        side_(side) {}

  DegenerateSide side() const noexcept { return side_; }

 private:
  DegenerateSide side_;
};

/// Malformed or invalid input data. Carries the 1-based line number when the
/// problem is tied to a line of an input file (0 otherwise).
class DataError : public Error {
 public:
  DataError(const std::string& message, std::size_t line = 0)
      : Error(line == 0 ? message
                        : "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Failures talking to a metric implementation, in-process or external.
class ScorerError : public Error {
 public:
  using Error::Error;
};

class ScorerTimeout : public ScorerError {
 public:
  using ScorerError::ScorerError;
};

/// The scorer broke the wire contract: bad handshake, mismatched id,
/// non-finite or out-of-range score.
class ProtocolViolation : public ScorerError {
 public:
  using ScorerError::ScorerError;
};

/// The scorer process could not be started or died. The message includes
/// whatever the process wrote to stderr.
class ScorerUnavailable : public ScorerError {
 public:
  using ScorerError::ScorerError;
};

}  // namespace evalcard
