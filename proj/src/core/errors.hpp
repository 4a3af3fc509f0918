#pragma once

#include <stdexcept>
#include <string>

namespace burngail {

// Bad or inconsistent configuration, unknown keys, schema/shape mismatches.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Faults raised while running: non-finite values, broken invariants, I/O failures.
class RuntimeFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace burngail
