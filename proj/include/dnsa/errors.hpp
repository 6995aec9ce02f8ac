#pragma once

#include <stdexcept>
#include <string>

namespace dnsa {

// Exit-code contract of the CLI: usage errors exit 1, data/validation errors
// exit 2, I/O errors exit 3. Library code throws one of these so the mapping
// stays mechanical.

class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dnsa
