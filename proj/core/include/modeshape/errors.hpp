#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace modeshape {

enum class ErrorCode {
  InvalidArgument,
  MalformedInput,
  GapDetected,
  TimeOrderError,
  WindowTooLong,
  EmptyInput,
  WindowTooShortAfterTaper,
  ZeroPower,
  NonPositiveAmplitude,
  SingularRegression,
  TooFewSamples,
  NonFiniteInput,
  NonZeroMean,
  NoComponentsKept,
  ZeroShape,
  TooManyClusters,
  UndefinedSilhouette,
  NoObservations,
  SamplingTooSlow,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above; the
// message is prefixed with the code name so CLI diagnostics stay greppable.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised by ingestion when a cell is empty or non-finite.
class GapError : public Error {
 public:
  GapError(std::size_t row, std::size_t column, const std::string& message);

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

}  // namespace modeshape
