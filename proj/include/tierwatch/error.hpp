#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tierwatch {

enum class ErrorCode {
  kInvalidInput,
  kEmptyInput,
  kMalformedDocument,
  kDanglingEndpoint,
  kDuplicateId,
  kUnknownEntity,
  kEmptyGraph,
  kSchemaInvalid,
  kBackendTimeout,
  kBackendFailure,
  kOutOfRange,
  kInvalidTransition,
  kMalformedEdits,
  kNotFound,
  kCorruptRecord,
  kInvalidConfig,
  kMissingCriterion,
  kNoCandidateSource,
  kRunLacksPaths,
  kScenarioMismatch,
  kIo,
};

// Machine-readable identifier, used verbatim in service error bodies.
constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "invalid_input";
    case ErrorCode::kEmptyInput: return "empty_input";
    case ErrorCode::kMalformedDocument: return "malformed_document";
    case ErrorCode::kDanglingEndpoint: return "dangling_endpoint";
    case ErrorCode::kDuplicateId: return "duplicate_id";
    case ErrorCode::kUnknownEntity: return "unknown_entity";
    case ErrorCode::kEmptyGraph: return "empty_graph";
    case ErrorCode::kSchemaInvalid: return "schema_invalid";
    case ErrorCode::kBackendTimeout: return "backend_timeout";
    case ErrorCode::kBackendFailure: return "backend_failure";
    case ErrorCode::kOutOfRange: return "out_of_range";
    case ErrorCode::kInvalidTransition: return "invalid_transition";
    case ErrorCode::kMalformedEdits: return "malformed_edits";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kCorruptRecord: return "corrupt_record";
    case ErrorCode::kInvalidConfig: return "invalid_config";
    case ErrorCode::kMissingCriterion: return "missing_criterion";
    case ErrorCode::kNoCandidateSource: return "no_candidate_source";
    case ErrorCode::kRunLacksPaths: return "run_lacks_paths";
    case ErrorCode::kScenarioMismatch: return "scenario_mismatch";
    case ErrorCode::kIo: return "io_error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tierwatch
