#pragma once

#include <stdexcept>
#include <string>

namespace structsum {

// Bad shapes, out-of-range indices, malformed input files.
class validation_error : public std::runtime_error {
 public:
  explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure: singular matrix, non-finite loss, failed inference.
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace structsum
