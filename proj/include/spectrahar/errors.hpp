#pragma once

#include <stdexcept>
#include <string>

namespace spectrahar {

// Exit-code classes surfaced by the CLI: usage 1, data 2, numeric 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

// Malformed or missing input data, I/O failures, label inconsistencies.
class DataError : public Error {
 public:
  using Error::Error;
};

// Eigensolver or optimizer failure.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace spectrahar
