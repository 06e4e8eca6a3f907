#pragma once

#include <cstdlib>
#include <string>

#include "symqoc/error.hpp"

namespace symqoc {

inline constexpr int kMaxThreads = 64;

/// Worker thread cap from SYMQOC_THREADS; 1 when unset.
inline int worker_threads() {
  const char* v = std::getenv("SYMQOC_THREADS");
  if (v == nullptr || *v == '\0') return 1;
  char* end = nullptr;
  const long t = std::strtol(v, &end, 10);
  require(end != v && *end == '\0' && t >= 1 && t <= kMaxThreads,
          std::string("SYMQOC_THREADS must be an integer in [1, ") + std::to_string(kMaxThreads) + "], got '" + v + "'");
  return static_cast<int>(t);
}

}  // namespace symqoc
