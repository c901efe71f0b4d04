// Copyright (c) 2026, The noisygrpo authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace noisygrpo {

/// Raised when an argument violates a documented precondition.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised for malformed files and wire records.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when training parameters become non-finite.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(int iteration, const std::string& what)
      : std::runtime_error("training diverged at iteration " +
                           std::to_string(iteration) + ": " + what),
        iteration_(iteration) {}

  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

namespace detail {

inline void require(bool ok, const std::string& message) {
  if (!ok) throw InvalidInput(message);
}

}  // namespace detail
}  // namespace noisygrpo
