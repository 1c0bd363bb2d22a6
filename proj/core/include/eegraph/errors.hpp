#pragma once

#include <stdexcept>
#include <string>

namespace eegraph {

/// Malformed or inconsistent input data (manifests, payloads, montage files).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Training produced a non-finite loss.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace eegraph
