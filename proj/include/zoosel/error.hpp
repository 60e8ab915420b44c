#pragma once

#include <stdexcept>
#include <string>

namespace zoosel {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

// Raised when input is well-formed but violates a domain invariant.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class BackendError : public Error {
 public:
  using Error::Error;
};

}  // namespace zoosel
