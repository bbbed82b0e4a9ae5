// Copyright sessrec contributors. Licensed under the terms of the Apache 2.0 license.
// See LICENSE in the project root.
#pragma once

#include <stdexcept>
#include <string>

namespace sessrec {

// Base error; the subclass selects the C-API status and the CLI exit code.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid configuration or usage (CLI exit code 2).
struct ConfigError : Error {
  using Error::Error;
};

// Missing or corrupt files (CLI exit code 1).
struct IoError : Error {
  using Error::Error;
};

// Incompatible tensor shapes passed to a kernel primitive.
struct ShapeError : Error {
  using Error::Error;
};

// Violated operation precondition.
struct PreconditionError : Error {
  using Error::Error;
};

}  // namespace sessrec
