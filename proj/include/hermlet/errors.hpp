#pragma once

#include <stdexcept>
#include <string>

namespace hermlet {

/// Invalid arguments or malformed input files. CLI maps this to exit code 2.
struct validation_error : std::invalid_argument {
  explicit validation_error(const std::string& msg) : std::invalid_argument(msg) {}
};

/// An iterative method failed to converge. CLI maps this to exit code 3.
struct convergence_error : std::runtime_error {
  explicit convergence_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A configured resource cap (term count, arrangement size) was exceeded.
struct resource_error : std::runtime_error {
  explicit resource_error(const std::string& msg) : std::runtime_error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw validation_error(msg);
}

}  // namespace hermlet
