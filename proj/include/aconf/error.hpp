#pragma once

#include <stdexcept>
#include <string>

namespace aconf {

/// Base for every error the library raises on bad input data.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent parameter space. `line` is 0 when the problem is
/// not tied to a source line.
class SpaceError : public Error {
 public:
  SpaceError(const std::string& msg, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class SpaceTooConstrained : public Error {
 public:
  using Error::Error;
};

class UnsupportedSpace : public Error {
 public:
  using Error::Error;
};

class ScenarioError : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class UndefinedStatistic : public Error {
 public:
  using Error::Error;
};

}  // namespace aconf
