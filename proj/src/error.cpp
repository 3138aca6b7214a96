#include "oneshot/error.hpp"

namespace oneshot {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NoInteriorData: return "NoInteriorData";
    case ErrorCode::SingularInformation: return "SingularInformation";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::InfeasibleDesign: return "InfeasibleDesign";
    case ErrorCode::Unsupported: return "Unsupported";
  }
  return "Unknown";
}

}  // namespace oneshot
