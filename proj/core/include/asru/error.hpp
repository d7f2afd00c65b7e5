#pragma once

#include <stdexcept>
#include <string>

namespace asru {

enum class ErrorCode {
  InvalidArgument,
  CapExceeded,
  NonReversibleNoClosedForm,
  NotApplicable,
  Divergence,
  Io,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Throws InvalidArgument with msg when cond is false.
void require(bool cond, const std::string& msg);

}  // namespace asru
