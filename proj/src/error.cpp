#include "obfuskit/error.hpp"

namespace obfuskit {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::EmptySeedSet: return "EmptySeedSet";
    case ErrorCode::NoSurvivors: return "NoSurvivors";
    case ErrorCode::InconsistentLedger: return "InconsistentLedger";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::MissingMarker: return "MissingMarker";
    case ErrorCode::MultipleMarkers: return "MultipleMarkers";
    case ErrorCode::MissingSlot: return "MissingSlot";
    case ErrorCode::ZeroVariants: return "ZeroVariants";
    case ErrorCode::ThresholdNotMet: return "ThresholdNotMet";
    case ErrorCode::EmptyQuery: return "EmptyQuery";
    case ErrorCode::BoundaryTie: return "BoundaryTie";
    case ErrorCode::MissingCredential: return "MissingCredential";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::TargetUnavailable: return "TargetUnavailable";
    case ErrorCode::MalformedResponse: return "MalformedResponse";
    case ErrorCode::ClientError: return "ClientError";
    case ErrorCode::ScorerUnavailable: return "ScorerUnavailable";
    case ErrorCode::EmptyOutcomeSet: return "EmptyOutcomeSet";
    case ErrorCode::UnmappedQuestion: return "UnmappedQuestion";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::MissingHeader: return "MissingHeader";
    case ErrorCode::EmptyRecords: return "EmptyRecords";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace obfuskit
