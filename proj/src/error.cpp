#include "encctl/error.hpp"

namespace encctl {

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kOk: return "Ok";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kNoRoot: return "NoRoot";
    case ErrorCode::kModulusMismatch: return "ModulusMismatch";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kScaleMismatch: return "ScaleMismatch";
    case ErrorCode::kTooManyTerms: return "TooManyTerms";
    case ErrorCode::kInvalidParams: return "InvalidParams";
    case ErrorCode::kNotObservable: return "NotObservable";
    case ErrorCode::kNotControllable: return "NotControllable";
    case ErrorCode::kRangeExceeded: return "RangeExceeded";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kUnstable: return "Unstable";
    case ErrorCode::kSInvalid: return "SInvalid";
    case ErrorCode::kConfigInvalid: return "ConfigInvalid";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Unknown";
}

}  // namespace encctl
