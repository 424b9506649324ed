#pragma once

#include <exception>
#include <string>
#include <string_view>

namespace psstn {

/// Root of every error raised by the library. The message can be prefixed
/// with pipeline stage names as the error propagates outwards.
class Error : public std::exception {
 public:
  explicit Error(std::string message) : message_(std::move(message)) {}

  const char* what() const noexcept override { return message_.c_str(); }

  void add_stage(std::string_view stage) {
    message_ = "[" + std::string(stage) + "] " + message_;
  }

 private:
  std::string message_;
};

/// Caller supplied something unusable: wrong shapes, bad indices, too little data.
class InputError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public InputError {
 public:
  using InputError::InputError;
};

class InsufficientData : public InputError {
 public:
  using InputError::InputError;
};

class IoError : public InputError {
 public:
  using InputError::InputError;
};

/// A dense object would exceed the configured entry budget.
class SizeGuardError : public Error {
 public:
  using Error::Error;
};

/// The data were well formed but the numerics could not deliver.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class NonFiniteInput : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

class NotPersistentlyExciting : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

class IdentifiabilityError : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

/// Runs `body`, tagging any library error with `stage` before rethrowing it
/// with its original dynamic type.
template <typename Body>
decltype(auto) run_stage(std::string_view stage, Body&& body) {
  try {
    return body();
  } catch (Error& e) {
    e.add_stage(stage);
    throw;
  }
}

}  // namespace psstn
