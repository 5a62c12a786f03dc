#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace obfuskit {

enum class ErrorCode {
  EmptyInput,
  EmptySeedSet,
  NoSurvivors,
  InconsistentLedger,
  InvalidConfig,
  MissingMarker,
  MultipleMarkers,
  MissingSlot,
  ZeroVariants,
  ThresholdNotMet,
  EmptyQuery,
  BoundaryTie,
  MissingCredential,
  RateLimited,
  TargetUnavailable,
  MalformedResponse,
  ClientError,
  ScorerUnavailable,
  EmptyOutcomeSet,
  UnmappedQuestion,
  MalformedRow,
  DuplicateId,
  MissingHeader,
  EmptyRecords,
  Io,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised by dataset ingestion; line is 1-based and counts the header.
class MalformedRowError : public Error {
 public:
  MalformedRowError(std::size_t line, const std::string& what)
      : Error(ErrorCode::MalformedRow, "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace obfuskit
