#include "autograder/error.hpp"

namespace autograder {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingInfoJson: return "MissingInfoJson";
    case ErrorCode::MalformedInfoJson: return "MalformedInfoJson";
    case ErrorCode::MissingTestsDir: return "MissingTestsDir";
    case ErrorCode::EmptyTestsDir: return "EmptyTestsDir";
    case ErrorCode::UnreadableFile: return "UnreadableFile";
    case ErrorCode::MalformedScore: return "MalformedScore";
    case ErrorCode::CopyFailure: return "CopyFailure";
    case ErrorCode::InsufficientPrivilege: return "InsufficientPrivilege";
    case ErrorCode::SpawnFailure: return "SpawnFailure";
    case ErrorCode::UserUnknown: return "UserUnknown";
    case ErrorCode::ScriptMismatch: return "ScriptMismatch";
    case ErrorCode::NoPointsDefined: return "NoPointsDefined";
    case ErrorCode::WriteFailure: return "WriteFailure";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

GraderError::GraderError(ErrorCode code, const std::string& message, std::string subject)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      subject_(std::move(subject)) {}

}  // namespace autograder
