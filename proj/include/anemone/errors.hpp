#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace anemone {

// Root of every error thrown by the library. The CLI maps any of these to a
// nonzero exit status with the message on stderr.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class RangeError : public Error {
  using Error::Error;
};
class ShapeError : public Error {
  using Error::Error;
};
class CapacityError : public Error {
  using Error::Error;
};
class NumericError : public Error {
  using Error::Error;
};
class ArgumentError : public Error {
  using Error::Error;
};
class BatchError : public Error {
  using Error::Error;
};
class ModeError : public Error {
  using Error::Error;
};
class StateError : public Error {
  using Error::Error;
};
class UndefinedMetricError : public Error {
  using Error::Error;
};
class IoError : public Error {
  using Error::Error;
};

}  // namespace anemone
