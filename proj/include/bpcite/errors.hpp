#pragma once

#include <stdexcept>
#include <string>

namespace bpcite {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad option values, unknown ids, out-of-range thresholds.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input data that violates a precondition (duplicate ids, undersized classes...).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: singular systems, dimension mismatches, fingerprint mismatch.
class ModelError : public Error {
 public:
  using Error::Error;
};

}  // namespace bpcite
