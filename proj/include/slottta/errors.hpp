#pragma once

#include <stdexcept>
#include <string>

namespace slottta {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tensor dimensions disagree with an operation's contract.
struct ShapeError : Error {
  using Error::Error;
};

// Values (not shapes) violate a precondition: non-finite pixels,
// out-of-range indices, too many ground-truth masks, ...
struct InputError : Error {
  using Error::Error;
};

// API misuse: non-scalar loss, missing gradient, non-deterministic
// objective handed to the gradient checker.
struct ContractError : Error {
  using Error::Error;
};

// Malformed or truncated serialized data.
struct FormatError : Error {
  using Error::Error;
};

// Invalid run configuration.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace slottta
