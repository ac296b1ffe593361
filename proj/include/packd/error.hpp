#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace packd {

enum class ErrorCode {
  NonSphere,
  NonManifold,
  Disconnected,
  BoundarySubdivided,
  TooFewCells,
  ArityMismatch,
  UnknownType,
  UntypedFace,
  ChooserRejected,
  PrerequisiteFailed,
  NotCertified,
  Unresolvable,
  DegenerateTriple,
  NotTangent,
  NonJordanFace,
  NotSimple,
  NonConvergent,
  LevelOutOfRange,
  MarkingMismatch,
  WordTooLong,
  InvalidChoice,
  NotPeriodic,
  Unstable,
  Io,
  Parse,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonSphere: return "NonSphere";
    case ErrorCode::NonManifold: return "NonManifold";
    case ErrorCode::Disconnected: return "Disconnected";
    case ErrorCode::BoundarySubdivided: return "BoundarySubdivided";
    case ErrorCode::TooFewCells: return "TooFewCells";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::UnknownType: return "UnknownType";
    case ErrorCode::UntypedFace: return "UntypedFace";
    case ErrorCode::ChooserRejected: return "ChooserRejected";
    case ErrorCode::PrerequisiteFailed: return "PrerequisiteFailed";
    case ErrorCode::NotCertified: return "NotCertified";
    case ErrorCode::Unresolvable: return "Unresolvable";
    case ErrorCode::DegenerateTriple: return "DegenerateTriple";
    case ErrorCode::NotTangent: return "NotTangent";
    case ErrorCode::NonJordanFace: return "NonJordanFace";
    case ErrorCode::NotSimple: return "NotSimple";
    case ErrorCode::NonConvergent: return "NonConvergent";
    case ErrorCode::LevelOutOfRange: return "LevelOutOfRange";
    case ErrorCode::MarkingMismatch: return "MarkingMismatch";
    case ErrorCode::WordTooLong: return "WordTooLong";
    case ErrorCode::InvalidChoice: return "InvalidChoice";
    case ErrorCode::NotPeriodic: return "NotPeriodic";
    case ErrorCode::Unstable: return "Unstable";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

/// Every failure in the library surfaces as this exception; `code()` is the
/// stable, machine-readable part.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace packd
