#pragma once

#include <stdexcept>
#include <string>

namespace matfit {

// Error categories mirrored by the C API status codes.
enum class ErrorCode {
  kInvalidArgument = 1,
  kInfeasible = 2,
  kIo = 3,
  kFormat = 4,
  kNumeric = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

}  // namespace matfit
