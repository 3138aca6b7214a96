#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace oneshot {

// Stable codes; the string names are part of the CLI/JSON contract.
enum class ErrorCode {
  InvalidArgument,
  ParseError,
  NoInteriorData,
  SingularInformation,
  DegenerateVariance,
  InfeasibleDesign,
  Unsupported,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace oneshot
