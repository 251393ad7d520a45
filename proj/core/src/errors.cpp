#include "modeshape/errors.hpp"

namespace modeshape {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MalformedInput: return "MalformedInput";
    case ErrorCode::GapDetected: return "GapDetected";
    case ErrorCode::TimeOrderError: return "TimeOrderError";
    case ErrorCode::WindowTooLong: return "WindowTooLong";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::WindowTooShortAfterTaper: return "WindowTooShortAfterTaper";
    case ErrorCode::ZeroPower: return "ZeroPower";
    case ErrorCode::NonPositiveAmplitude: return "NonPositiveAmplitude";
    case ErrorCode::SingularRegression: return "SingularRegression";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::NonZeroMean: return "NonZeroMean";
    case ErrorCode::NoComponentsKept: return "NoComponentsKept";
    case ErrorCode::ZeroShape: return "ZeroShape";
    case ErrorCode::TooManyClusters: return "TooManyClusters";
    case ErrorCode::UndefinedSilhouette: return "UndefinedSilhouette";
    case ErrorCode::NoObservations: return "NoObservations";
    case ErrorCode::SamplingTooSlow: return "SamplingTooSlow";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

GapError::GapError(std::size_t row, std::size_t column, const std::string& message)
    : Error(ErrorCode::GapDetected, message), row_(row), column_(column) {}

}  // namespace modeshape
