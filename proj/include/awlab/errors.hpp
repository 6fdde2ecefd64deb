#pragma once

#include <stdexcept>
#include <string>

namespace awlab {

// Raised when a computation cannot deliver the requested error bound within
// the configured precision ceiling, or when an input ball is too wide to
// determine the result (e.g. a residue mod 2pi with input error >= pi).
class PrecisionExhausted : public std::runtime_error {
 public:
  explicit PrecisionExhausted(const std::string& what)
      : std::runtime_error(what) {}
};

// Perturbation window J does not extend past the required cutoff j0.
class WindowTooSmall : public std::runtime_error {
 public:
  explicit WindowTooSmall(const std::string& what) : std::runtime_error(what) {}
};

// Chain endpoint x + g lies outside the requested sup-norm ball U.
class TargetOutsideU : public std::runtime_error {
 public:
  explicit TargetOutsideU(const std::string& what) : std::runtime_error(what) {}
};

// A bit word is longer than the product measure backing it.
class LengthMismatch : public std::runtime_error {
 public:
  explicit LengthMismatch(const std::string& what) : std::runtime_error(what) {}
};

// An odometer orbit segment crossed the all-ones wrap point.
class OverflowOnOrbit : public std::runtime_error {
 public:
  explicit OverflowOnOrbit(const std::string& what) : std::runtime_error(what) {}
};

// Requested coordinate range exceeds the configured block cap.
class BlockOverflow : public std::runtime_error {
 public:
  explicit BlockOverflow(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace awlab
