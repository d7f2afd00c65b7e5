#include "asru/error.hpp"

namespace asru {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::CapExceeded: return "cap_exceeded";
    case ErrorCode::NonReversibleNoClosedForm: return "non_reversible_no_closed_form";
    case ErrorCode::NotApplicable: return "not_applicable";
    case ErrorCode::Divergence: return "divergence";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void require(bool cond, const std::string& msg) {
  if (!cond) throw Error(ErrorCode::InvalidArgument, msg);
}

}  // namespace asru
