#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace encctl {

/// Failure categories surfaced by the library. The numeric values are part of
/// the C API (see encctl/encctl.h) and must stay stable.
enum class ErrorCode : int {
  kOk = 0,
  kInvalidArgument = 1,
  kNoRoot = 2,
  kModulusMismatch = 3,
  kLengthMismatch = 4,
  kScaleMismatch = 5,
  kTooManyTerms = 6,
  kInvalidParams = 7,
  kNotObservable = 8,
  kNotControllable = 9,
  kRangeExceeded = 10,
  kDimMismatch = 11,
  kUnstable = 12,
  kSInvalid = 13,
  kConfigInvalid = 14,
  kIo = 15,
  kInternal = 16,
};

std::string_view error_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace encctl
