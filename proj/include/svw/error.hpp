#ifndef SVW_ERROR_HPP_
#define SVW_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace svw {

// Failure categories of the core library. The C API maps these one-to-one
// onto svw_status values.
enum class ErrorCode {
  InvalidParameter = 1,
  ConfigInvalid = 2,
  Io = 3,
  CflViolation = 4,
  GridMismatch = 5,
  IterationFailure = 6,
  EmptyWindow = 7,
  Runtime = 8,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace svw

#endif  // SVW_ERROR_HPP_
