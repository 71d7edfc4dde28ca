#include "lk/error.hpp"

namespace lk {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::IsolatedVertex: return "IsolatedVertex";
    case ErrorCode::DanglingEdge: return "DanglingEdge";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::Disconnected: return "Disconnected";
    case ErrorCode::NotBoundary: return "NotBoundary";
    case ErrorCode::NotBijection: return "NotBijection";
    case ErrorCode::ResultHasIsolatedVertex: return "ResultHasIsolatedVertex";
    case ErrorCode::UnknownId: return "UnknownId";
    case ErrorCode::NotInteriorEdge: return "NotInteriorEdge";
    case ErrorCode::LoopEdge: return "LoopEdge";
    case ErrorCode::EmptyPartitionCell: return "EmptyPartitionCell";
    case ErrorCode::NotInteriorVertex: return "NotInteriorVertex";
    case ErrorCode::BoundaryAdjacentEdge: return "BoundaryAdjacentEdge";
    case ErrorCode::ClosedComponent: return "ClosedComponent";
    case ErrorCode::BoundaryMismatch: return "BoundaryMismatch";
    case ErrorCode::SpecMismatch: return "SpecMismatch";
    case ErrorCode::LogBranchIllConditioned: return "LogBranchIllConditioned";
    case ErrorCode::TooFarFromGroup: return "TooFarFromGroup";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NotBased: return "NotBased";
    case ErrorCode::NotInLieG0: return "NotInLieG0";
    case ErrorCode::ResidualTooLarge: return "ResidualTooLarge";
    case ErrorCode::MomentNotZero: return "MomentNotZero";
    case ErrorCode::RootNotBoundary: return "RootNotBoundary";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::NewtonDiverged: return "NewtonDiverged";
    case ErrorCode::DiagonalMomentNonzero: return "DiagonalMomentNonzero";
    case ErrorCode::EndpointBecomesBoundary: return "EndpointBecomesBoundary";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace lk
