#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace keyrank {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionError : Error {
  using Error::Error;
};

/// Bad value ranges (non-positive sigma, probabilities outside [0,1], ...).
struct DomainError : Error {
  using Error::Error;
};

/// Malformed dataset / checkpoint / embedding files.
struct SchemaError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

struct NotFoundError : Error {
  using Error::Error;
};

template <typename... Args>
std::string cat(Args&&... args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}

}  // namespace keyrank
