#pragma once

#include <stdexcept>
#include <string>

namespace dnls {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Mismatched lengths, grids or time axes between objects that must agree.
class StructuralError : public Error {
 public:
  explicit StructuralError(const std::string& msg) : Error(msg) {}
};

/// A caller-supplied parameter outside its admissible range.
class ArgumentError : public Error {
 public:
  explicit ArgumentError(const std::string& msg) : Error(msg) {}
};

/// The periodic box is too small for the requested object (mass touches the
/// boundary, a packet leaves the domain, ...).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& msg) : Error(msg) {}
};

/// Non-finite values appeared during time stepping.
class BlowUpError : public Error {
 public:
  BlowUpError(const std::string& msg, double last_good_time)
      : Error(msg), last_good_time_(last_good_time) {}
  double last_good_time() const noexcept { return last_good_time_; }

 private:
  double last_good_time_;
};

}  // namespace dnls
