#pragma once

#include <stdexcept>
#include <string>

namespace tabser {

enum class ErrorKind {
  // data / parsing
  missing_column,
  parse_error,
  empty_dataset,
  arity_mismatch,
  missing_placeholder,
  empty_choices,
  duplicate_choices,
  single_class,
  no_eligible_class,
  missing_class_in_train,
  non_convergence,
  unknown_sex,
  unknown_subject,
  non_finite_score,
  io_error,
  // backend
  backend_error,
  timeout,
  http_status,
  rate_limited,
  missing_logprobs,
  // command line
  usage,
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

/// Malformed or inconsistent input data. CLI exit code 2.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Failure talking to a language-model backend. CLI exit code 3.
class BackendError : public Error {
 public:
  using Error::Error;

  BackendError(ErrorKind kind, const std::string& message, int status)
      : Error(kind, message), status_(status) {}

  int status() const { return status_; }

 private:
  int status_ = 0;
};

/// Bad command-line usage. CLI exit code 1.
class UsageError : public Error {
 public:
  explicit UsageError(const std::string& message) : Error(ErrorKind::usage, message) {}
};

}  // namespace tabser
