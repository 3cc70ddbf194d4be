#pragma once

#include <stdexcept>
#include <string>

namespace msast {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes disagree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Invalid hyperparameter or configuration value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input data (labels, feature files, sequences).
class DataError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss or gradient.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Checkpoint and data disagree (feature dim, class count).
class IncompatibleError : public Error {
 public:
  using Error::Error;
};

// Operation requested on a model of the wrong kind (e.g. streaming an offline model).
class ModeError : public Error {
 public:
  using Error::Error;
};

// Broken internal invariant.
class LogicError : public Error {
 public:
  using Error::Error;
};

}  // namespace msast
