#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace unitrhythm {

enum class ErrorKind {
  // input errors
  InvalidArgument,
  DimensionMismatch,
  ZeroNormRow,
  BadMagic,
  UnsupportedVersion,
  TruncatedPayload,
  BadFormat,
  IoError,
  CoverageGap,
  UnitOutOfRange,
  UnassignedUnit,
  FlagLengthMismatch,
  EmptyWaveform,
  WindowTooShort,
  UnsupportedWav,
  SchemaMismatch,
  NonPositiveRate,
  MissingClassModel,
  PlanCoverageMismatch,
  LabelSequenceMismatch,
  UnknownPhoneLabel,
  LengthMismatch,
  EmptySample,
  UAtOne,
  // data / degeneracy errors
  TooFewUnits,
  EmptyCorpus,
  AmbiguousLabeling,
  TooFewSamples,
  DegenerateData,
  NonPositiveDuration,
  ZeroVariance,
  // internal
  NoConvergence,
  Internal,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Exit-code family of an error kind: 2 input, 3 data/degeneracy, 4 internal.
int exit_code_for(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), detail_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace unitrhythm
