#pragma once

#include <stdexcept>
#include <string>

namespace pdmpc {

// Base class for all engine errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A value fell outside the domain of a curve or table.
class OutOfRangeError : public Error {
public:
  explicit OutOfRangeError(const std::string& msg) : Error(msg) {}
};

// A mass-balance step would drive storage negative; the caller must clamp
// the outflow, never the storage.
class NegativeStorageError : public Error {
public:
  explicit NegativeStorageError(const std::string& msg) : Error(msg) {}
};

// Series arguments that must agree in length do not.
class LengthMismatchError : public Error {
public:
  explicit LengthMismatchError(const std::string& msg) : Error(msg) {}
};

// Malformed input file; message carries the line number where known.
class ParseError : public Error {
public:
  explicit ParseError(const std::string& msg) : Error(msg) {}
};

// Well-formed input with invalid content (negative inflow, bad ranges, ...).
class ValidationError : public Error {
public:
  explicit ValidationError(const std::string& msg) : Error(msg) {}
};

// The filesystem refused a read or write.
class IoError : public Error {
public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace pdmpc
