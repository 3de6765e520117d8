#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hoi {

enum class ErrorCode {
  InvalidData,
  DegenerateColumn,
  InsufficientSamples,
  NotPositiveDefinite,
  InvalidOrderRange,
  InvalidNplet,
  ExhaustiveLimitExceeded,
  DegenerateEffectSize,
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// True for failures that arise while computing on otherwise valid input.
  bool is_computation_error() const noexcept {
    return code_ == ErrorCode::NotPositiveDefinite || code_ == ErrorCode::DegenerateEffectSize;
  }

 private:
  ErrorCode code_;
};

}  // namespace hoi
