#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qextrap {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invariant violations on user-supplied objects. Carries one message per failed check.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

// An operation was called outside its documented domain.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// The conic backend could not produce a usable answer.
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace qextrap
