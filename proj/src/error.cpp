#include "unitrhythm/error.hpp"

namespace unitrhythm {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ZeroNormRow: return "ZeroNormRow";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorKind::TruncatedPayload: return "TruncatedPayload";
    case ErrorKind::BadFormat: return "BadFormat";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::CoverageGap: return "CoverageGap";
    case ErrorKind::UnitOutOfRange: return "UnitOutOfRange";
    case ErrorKind::UnassignedUnit: return "UnassignedUnit";
    case ErrorKind::FlagLengthMismatch: return "FlagLengthMismatch";
    case ErrorKind::EmptyWaveform: return "EmptyWaveform";
    case ErrorKind::WindowTooShort: return "WindowTooShort";
    case ErrorKind::UnsupportedWav: return "UnsupportedWav";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::NonPositiveRate: return "NonPositiveRate";
    case ErrorKind::MissingClassModel: return "MissingClassModel";
    case ErrorKind::PlanCoverageMismatch: return "PlanCoverageMismatch";
    case ErrorKind::LabelSequenceMismatch: return "LabelSequenceMismatch";
    case ErrorKind::UnknownPhoneLabel: return "UnknownPhoneLabel";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EmptySample: return "EmptySample";
    case ErrorKind::UAtOne: return "UAtOne";
    case ErrorKind::TooFewUnits: return "TooFewUnits";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::AmbiguousLabeling: return "AmbiguousLabeling";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    case ErrorKind::DegenerateData: return "DegenerateData";
    case ErrorKind::NonPositiveDuration: return "NonPositiveDuration";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::Internal: return "Internal";
  }
  return "Unknown";
}

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::TooFewUnits:
    case ErrorKind::EmptyCorpus:
    case ErrorKind::AmbiguousLabeling:
    case ErrorKind::TooFewSamples:
    case ErrorKind::DegenerateData:
    case ErrorKind::NonPositiveDuration:
    case ErrorKind::ZeroVariance:
      return 3;
    case ErrorKind::NoConvergence:
    case ErrorKind::Internal:
      return 4;
    default:
      return 2;
  }
}

}  // namespace unitrhythm
