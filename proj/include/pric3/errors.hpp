#pragma once

#include <stdexcept>
#include <string>

namespace pric3 {

// Caller broke a documented precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A checker-internal invariant did not hold. Always a bug.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A configured limit (states, frames, obligations) was exceeded.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Syntax or semantic problem in an input model.
class ModelError : public std::runtime_error {
 public:
  ModelError(const std::string& message, int line = 0, int column = 0)
      : std::runtime_error(line > 0 ? std::to_string(line) + ":" + std::to_string(column) + ": " + message
                                    : message),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace pric3
