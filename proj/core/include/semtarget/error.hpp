#pragma once

#include <stdexcept>
#include <string>

namespace semtarget {

/// Input that is well-formed I/O-wise but violates a format or domain
/// invariant (cycles, duplicate indices, schema errors, shape mismatches).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be opened, read, or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A quality gate (e.g. classifier accuracy floor) was not met.
class QualityGateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace semtarget
