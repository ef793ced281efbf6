// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace dgkd {

/// Base exception for every recoverable failure in the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a file or record violates its documented layout.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Raised when a required on-disk artifact is missing.
class MissingArtifact : public Error {
 public:
  using Error::Error;
};

}  // namespace dgkd
