#pragma once

#include <stdexcept>
#include <string>

namespace hodgemix {

// Base class for everything thrown by the library. The CLI maps the three
// categories below onto distinct process exit codes.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// --- input / validation errors -------------------------------------------

class InputError : public Error {
public:
  using Error::Error;
};

class IndexOutOfRange : public InputError {
public:
  using InputError::InputError;
};

class SelfComparison : public InputError {
public:
  using InputError::InputError;
};

class NonFiniteResponse : public InputError {
public:
  using InputError::InputError;
};

class NegativeWeight : public InputError {
public:
  using InputError::InputError;
};

class DimensionMismatch : public InputError {
public:
  using InputError::InputError;
};

class InvalidArgument : public InputError {
public:
  using InputError::InputError;
};

class TooFewRecords : public InputError {
public:
  using InputError::InputError;
};

class TOutOfRange : public InputError {
public:
  using InputError::InputError;
};

class UnknownAnnotator : public InputError {
public:
  using InputError::InputError;
};

class MalformedRow : public InputError {
public:
  MalformedRow(std::size_t line, const std::string& what)
      : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

class UnknownChoiceToken : public MalformedRow {
public:
  UnknownChoiceToken(std::size_t line, const std::string& token)
      : MalformedRow(line, "unknown choice token '" + token + "'") {}
};

class EmptyFile : public InputError {
public:
  using InputError::InputError;
};

// --- numerical errors ------------------------------------------------------

class NumericalError : public Error {
public:
  using Error::Error;
};

class SolverDidNotConverge : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class ConfigUnstable : public NumericalError {
public:
  using NumericalError::NumericalError;
};

// --- I/O errors -------------------------------------------------------------

class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace hodgemix
