#pragma once

#include <stdexcept>
#include <string>

namespace qbreathe {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr double kPi = 3.14159265358979323846264338327950288;

// Bad user input: invalid flags, config keys, parameter combinations.
// Mapped to exit code 2 by the CLI.
struct config_error : std::runtime_error {
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A numerical routine failed to meet its contract (non-convergence,
// lost bracket, tolerance violation).  Mapped to exit code 3.
struct numeric_error : std::runtime_error {
  explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace qbreathe
