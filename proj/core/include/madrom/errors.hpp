#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace madrom {

/// A non-finite value showed up where the computation requires finite numbers.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, std::int64_t node = -1)
      : std::runtime_error(what), node_(node) {}

  /// Graph node that produced the value, or -1 when not tied to a graph.
  std::int64_t node() const noexcept { return node_; }

 private:
  std::int64_t node_;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ChecksumError : public IoError {
 public:
  using IoError::IoError;
};

class VersionError : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace madrom
