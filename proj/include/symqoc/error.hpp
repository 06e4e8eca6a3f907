#pragma once

#include <stdexcept>
#include <string>

namespace symqoc {

/// Invalid input: out-of-range indices, size guards, malformed files.
/// The CLI maps this to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Numerical failure: non-finite objective, failed correctness gate,
/// rank deficiency. The CLI maps this to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ValidationError(msg);
}

}  // namespace symqoc
