#pragma once

#include <stdexcept>
#include <string>

namespace cqed {

enum class ErrorCode {
  InvalidInput,
  Syntax,
  UnknownElement,
  UnitMismatch,
  DanglingReference,
  NonConvergence,
  NotInvertible,
  NotPositive,
  Mismatch,
  CapExceeded,
  PoleProximity,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cqed
