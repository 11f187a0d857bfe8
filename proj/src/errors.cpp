#include "cqed/errors.hpp"

namespace cqed {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "invalid_input";
    case ErrorCode::Syntax: return "syntax_error";
    case ErrorCode::UnknownElement: return "unknown_element";
    case ErrorCode::UnitMismatch: return "unit_mismatch";
    case ErrorCode::DanglingReference: return "dangling_reference";
    case ErrorCode::NonConvergence: return "non_convergence";
    case ErrorCode::NotInvertible: return "not_invertible";
    case ErrorCode::NotPositive: return "not_positive";
    case ErrorCode::Mismatch: return "mismatch";
    case ErrorCode::CapExceeded: return "cap_exceeded";
    case ErrorCode::PoleProximity: return "pole_proximity";
  }
  return "unknown";
}

}  // namespace cqed
