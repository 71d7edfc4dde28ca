#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lk {

enum class ErrorCode {
  // quiver
  IsolatedVertex,
  DanglingEdge,
  DuplicateId,
  Disconnected,
  NotBoundary,
  NotBijection,
  ResultHasIsolatedVertex,
  UnknownId,
  // homotopy
  NotInteriorEdge,
  LoopEdge,
  EmptyPartitionCell,
  NotInteriorVertex,
  BoundaryAdjacentEdge,
  ClosedComponent,
  BoundaryMismatch,
  // liegroup
  SpecMismatch,
  LogBranchIllConditioned,
  TooFarFromGroup,
  // fields
  InvalidGrid,
  ShapeMismatch,
  NotBased,
  NotInLieG0,
  ResidualTooLarge,
  MomentNotZero,
  RootNotBoundary,
  SingularSystem,
  NewtonDiverged,
  // reduction
  DiagonalMomentNonzero,
  EndpointBecomesBoundary,
  // tqft
  ArityMismatch,
  ParseError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can dispatch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lk
