#pragma once

#include <stdexcept>
#include <string>

namespace vpr {

// Base for every error raised by the library. `module()` names the stage that
// failed so the CLI can report where a pipeline broke.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& what);
  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

// Bad input values, shapes, or parameters. CLI exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Missing, unreadable, or undecodable files. CLI exit code 2.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace vpr
