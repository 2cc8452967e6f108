#pragma once

#include <stdexcept>
#include <string>

namespace vhetnet {

// Bad or unreadable input data (CDR files, load CSVs, placements).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration: unknown keys, out-of-range hyperparameters.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// No switching state satisfies the MBS/HAPS capacity constraints.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace vhetnet
