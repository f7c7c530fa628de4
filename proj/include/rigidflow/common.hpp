// Copyright 2026 The rigidflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace rigidflow {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad argument: non-finite value, shape mismatch, out-of-range parameter.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Operation hit a singularity (e.g. rotation angle at pi, degenerate
/// point set). The caller decides the fallback.
class NearSingular : public Error {
 public:
  using Error::Error;
};

/// A weighted reduction has (numerically) no support.
class EmptySupport : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. Carries a byte offset when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::int64_t byte_offset = -1)
      : Error(byte_offset >= 0
                  ? msg + " (byte offset " + std::to_string(byte_offset) + ")"
                  : msg),
        byte_offset_(byte_offset) {}

  std::int64_t byte_offset() const { return byte_offset_; }

 private:
  std::int64_t byte_offset_;
};

/// Numeric failure at runtime (non-finite loss, divergence).
class NumericFailure : public Error {
 public:
  using Error::Error;
};

/// Compensated (Kahan) accumulator. All grid reductions in this library go
/// through this so that parallel and serial evaluation orders agree to
/// well below 1e-12.
class KahanSum {
 public:
  void add(double x) {
    const double y = x - compensation_;
    const double t = sum_ + y;
    compensation_ = (t - sum_) - y;
    sum_ = t;
  }

  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

inline bool is_finite(double x) { return std::isfinite(x); }

}  // namespace rigidflow
