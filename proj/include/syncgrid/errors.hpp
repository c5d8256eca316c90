#pragma once

#include <stdexcept>
#include <string>

namespace syncgrid {

// Invalid or inconsistent configuration (bad field values, bad config file).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A caller broke an API precondition (unavailable action, shape mismatch).
struct ContractError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A requested computation exceeds a hard size cap.
struct SizeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An iterative numeric routine failed to converge.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem failure while reading or writing artifacts.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace syncgrid
