#pragma once

#include <stdexcept>
#include <string>

namespace egonet {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid arguments to a generator or geometric primitive.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// A finite resource (e.g. the label space) is exhausted.
class CapacityError : public Error {
 public:
  using Error::Error;
};

class UnknownNodeError : public Error {
 public:
  explicit UnknownNodeError(std::size_t id) : Error("unknown node id " + std::to_string(id)) {}
};

class DisconnectedError : public Error {
 public:
  using Error::Error;
};

// Task generation could not satisfy a constraint.
class GenerationError : public Error {
 public:
  using Error::Error;
};

// Malformed user response or file content.
class InputError : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

}  // namespace egonet
