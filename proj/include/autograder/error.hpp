#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace autograder {

enum class ErrorCode {
  MissingInfoJson,
  MalformedInfoJson,
  MissingTestsDir,
  EmptyTestsDir,
  UnreadableFile,
  MalformedScore,
  CopyFailure,
  InsufficientPrivilege,
  SpawnFailure,
  UserUnknown,
  ScriptMismatch,
  NoPointsDefined,
  WriteFailure,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

// Every failure the engine reports carries a code and, where one exists, the
// offending path or field name.
class GraderError : public std::runtime_error {
 public:
  GraderError(ErrorCode code, const std::string& message, std::string subject = {});

  ErrorCode code() const noexcept { return code_; }
  // Path, field name, or user name the error is about. May be empty.
  const std::string& subject() const noexcept { return subject_; }

 private:
  ErrorCode code_;
  std::string subject_;
};

}  // namespace autograder
