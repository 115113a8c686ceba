#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bandlab {

enum class ErrorKind {
  NotSquare,
  NonFiniteDistance,
  NegativeDistance,
  AsymmetricMatrix,
  NonzeroDiagonal,
  TriangleViolation,
  IndexOutOfRange,
  EmptySelection,
  PointOutsideDomain,
  ParameterOutOfRange,
  RadiusExceedsTree,
  MembershipViolation,
  InsufficientSamples,
  EndpointsMismatch,
  MissingParameters,
  LengthMismatch,
  WindowTooLarge,
  InvalidTree,
  InvalidConfig,
  ParseError,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotSquare: return "NotSquare";
    case ErrorKind::NonFiniteDistance: return "NonFiniteDistance";
    case ErrorKind::NegativeDistance: return "NegativeDistance";
    case ErrorKind::AsymmetricMatrix: return "AsymmetricMatrix";
    case ErrorKind::NonzeroDiagonal: return "NonzeroDiagonal";
    case ErrorKind::TriangleViolation: return "TriangleViolation";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::EmptySelection: return "EmptySelection";
    case ErrorKind::PointOutsideDomain: return "PointOutsideDomain";
    case ErrorKind::ParameterOutOfRange: return "ParameterOutOfRange";
    case ErrorKind::RadiusExceedsTree: return "RadiusExceedsTree";
    case ErrorKind::MembershipViolation: return "MembershipViolation";
    case ErrorKind::InsufficientSamples: return "InsufficientSamples";
    case ErrorKind::EndpointsMismatch: return "EndpointsMismatch";
    case ErrorKind::MissingParameters: return "MissingParameters";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::WindowTooLarge: return "WindowTooLarge";
    case ErrorKind::InvalidTree: return "InvalidTree";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Every failure raised by the library. `indices` carries the offending
/// point indices where the error has them (e.g. TriangleViolation(i,k,j)).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message, std::vector<std::size_t> indices = {})
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        indices_(std::move(indices)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::vector<std::size_t>& indices() const noexcept { return indices_; }

 private:
  ErrorKind kind_;
  std::vector<std::size_t> indices_;
};

}  // namespace bandlab
