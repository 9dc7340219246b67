#pragma once

#include <stdexcept>
#include <string>

namespace omicq {

// Input or contract violation; the CLI maps it to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem failure; the CLI maps it to exit code 2.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace omicq
