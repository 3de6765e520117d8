#include "hoi/error.hpp"

namespace hoi {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidData: return "InvalidData";
    case ErrorCode::DegenerateColumn: return "DegenerateColumn";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::InvalidOrderRange: return "InvalidOrderRange";
    case ErrorCode::InvalidNplet: return "InvalidNplet";
    case ErrorCode::ExhaustiveLimitExceeded: return "ExhaustiveLimitExceeded";
    case ErrorCode::DegenerateEffectSize: return "DegenerateEffectSize";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace hoi
