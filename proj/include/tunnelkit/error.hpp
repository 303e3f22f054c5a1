#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tunnelkit {

enum class ErrorKind {
  // potential
  NoConvergence,
  DegenerateWell,
  SymmetryViolation,
  InvalidPotential,
  EnergyAboveBarrier,
  // spectrum
  EmptySeries,
  ResonanceError,
  // agmon
  GridTooCoarse,
  ShellDrift,
  NoCrossing,
  CausticReached,
  PoorFit,
  NotSeparable,
  NonSmooth,
  // tunneling
  NoCriticalPoint,
  CoverageGap,
  DegenerateCriticalPoint,
  // reference
  BoxTooSmall,
  GapViolation,
  // cli
  ParseError,
  ValidationError,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so that callers (the CLI
/// in particular) can map it onto exit codes and machine-readable records.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::DegenerateWell: return "DegenerateWell";
    case ErrorKind::SymmetryViolation: return "SymmetryViolation";
    case ErrorKind::InvalidPotential: return "InvalidPotential";
    case ErrorKind::EnergyAboveBarrier: return "EnergyAboveBarrier";
    case ErrorKind::EmptySeries: return "EmptySeries";
    case ErrorKind::ResonanceError: return "ResonanceError";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::ShellDrift: return "ShellDrift";
    case ErrorKind::NoCrossing: return "NoCrossing";
    case ErrorKind::CausticReached: return "CausticReached";
    case ErrorKind::PoorFit: return "PoorFit";
    case ErrorKind::NotSeparable: return "NotSeparable";
    case ErrorKind::NonSmooth: return "NonSmooth";
    case ErrorKind::NoCriticalPoint: return "NoCriticalPoint";
    case ErrorKind::CoverageGap: return "CoverageGap";
    case ErrorKind::DegenerateCriticalPoint: return "DegenerateCriticalPoint";
    case ErrorKind::BoxTooSmall: return "BoxTooSmall";
    case ErrorKind::GapViolation: return "GapViolation";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

}  // namespace tunnelkit
