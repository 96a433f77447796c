#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace stormdn {

// Base class for every error raised by the library. The CLI maps the
// subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

class MissingData : public Error {
 public:
  using Error::Error;
};

class SingularInput : public Error {
 public:
  using Error::Error;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class InvalidState : public Error {
 public:
  using Error::Error;
};

class InfeasibleModel : public Error {
 public:
  using Error::Error;
};

class SolverLimit : public Error {
 public:
  using Error::Error;
};

// Collects every violation found by a validator and reports them at once.
class ValidationError : public InvalidInput {
 public:
  explicit ValidationError(std::vector<std::string> violations)
      : InvalidInput(join(violations)), violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "validation failed:";
    for (const auto& s : v) out += "\n  - " + s;
    return out;
  }
  std::vector<std::string> violations_;
};

}  // namespace stormdn
