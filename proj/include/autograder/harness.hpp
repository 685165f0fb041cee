#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "autograder/diagnostic.hpp"
#include "autograder/question.hpp"
#include "autograder/sandbox.hpp"

namespace autograder {

// How to run one test file. Placeholders {test_file}, {student_file} and
// {answer_file} are replaced by absolute paths.
struct LanguageBackend {
  std::string name;
  std::vector<std::string> command_template;
  std::string file_extension;  // without the dot

  // Throws GraderError(InvalidArgument) unless {test_file} occurs exactly once.
  void validate() const;

  std::vector<std::string> instantiate(const std::string& test_file, const std::string& student_file,
                                       const std::string& answer_file) const;

  // "sh", "bash", "python" or "r"; anything else is read as a whitespace
  // separated command template.
  static LanguageBackend from_name_or_template(std::string_view text);
  static std::vector<std::string> builtin_names();
};

struct ExpectationRecord {
  bool passed = false;
  std::string call;
  std::string diff;
  std::optional<std::string> info;

  bool operator==(const ExpectationRecord&) const = default;
};

enum class Outcome { Passed, Failed, Absent };

std::string_view to_string(Outcome outcome);

struct TestResult {
  std::string file;
  Outcome outcome = Outcome::Absent;
  std::vector<ExpectationRecord> records;
  std::string raw_stderr;
  std::int64_t duration_ms = 0;
  bool timed_out = false;
  // Why an Absent test produced nothing, e.g. "timed out after 5 s".
  std::string absent_reason;
  Diagnostics diagnostics;
};

// Passed iff records are non-empty and all passed; Absent iff empty.
Outcome classify(const std::vector<ExpectationRecord>& records);

inline constexpr std::string_view kRecordSentinel = "@@GRADER@@ ";
inline constexpr std::string_view kSeedVariable = "GRADER_SEED";

struct ParsedStream {
  std::vector<ExpectationRecord> records;
  Diagnostics diagnostics;
};

// Lines starting with the sentinel carry one JSON object each; everything
// else is ignored. Malformed record lines become diagnostics.
ParsedStream parse_result_stream(std::string_view stdout_text);

// One protocol line (without newline) for `record`.
std::string format_record_line(const ExpectationRecord& record);

// Whole days since 1970-01-01.
std::int64_t daily_seed(std::chrono::year_month_day date);
std::chrono::year_month_day today_utc();
// Strict YYYY-MM-DD. Throws GraderError(InvalidArgument).
std::chrono::year_month_day parse_date(std::string_view text);

// One element per line; trailing blanks and trailing empty lines dropped;
// lines that are entirely a number are rewritten in shortest round-trip form.
std::vector<std::string> canonical_lines(std::string_view value_text);

ExpectationRecord compare_and_record(std::string_view expected, std::string_view actual, std::string call);

struct HarnessOptions {
  sandbox::StagedJob job;
  // Result of lockdown; FullPrivilegeDrop enables the grading user below.
  sandbox::Isolation isolation = sandbox::Isolation::None;
  std::optional<sandbox::UserIdentity> grading_user;
  int timeout_s = 5;
  int grace_s = sandbox::kDefaultGraceSeconds;
  std::size_t stdout_limit_bytes = sandbox::kDefaultStreamLimit;
  std::size_t stderr_limit_bytes = sandbox::kDefaultStreamLimit;
  std::optional<int> niceness;
  // Executable offering the eval-safe and expect-equal helpers to test scripts.
  std::filesystem::path helper_binary;
  std::string path_env = "/usr/local/sbin:/usr/local/bin:/usr/sbin:/usr/bin:/sbin:/bin";
  // Adds the test's index to the seed, so tests draw different numbers.
  bool seed_offset_by_index = false;
};

// Runs every test file of `layout` in its own sandboxed child, in order.
// Never throws for per-test problems: those become Absent results.
std::vector<TestResult> run_test_dir(const QuestionLayout& layout, const LanguageBackend& backend,
                                     std::int64_t seed, const HarnessOptions& options);

// The student file a backend should load: the first staged file with the
// backend's extension, else the first staged file.
std::optional<std::filesystem::path> pick_student_file(const std::vector<std::filesystem::path>& files,
                                                       const LanguageBackend& backend);

// Environment variables visible to test drivers.
namespace env {
inline constexpr const char* kSeed = "GRADER_SEED";
inline constexpr const char* kTestIndex = "GRADER_TEST_INDEX";
inline constexpr const char* kStudentFile = "GRADER_STUDENT_FILE";
inline constexpr const char* kAnswerFile = "GRADER_ANSWER_FILE";
inline constexpr const char* kHelper = "GRADER_BIN";
inline constexpr const char* kUser = "GRADER_USER";
inline constexpr const char* kTimeout = "GRADER_TIMEOUT";
}  // namespace env

// Runs `command` from inside a test driver with the student file exposed and,
// when a grading user is configured, under that user. The child inherits only
// PATH, HOME and the seed. Output is relayed to the given streams; returns the
// child's exit status (128 + signal when killed).
struct EvalSafeRequest {
  std::vector<std::string> command;
  std::optional<std::string> user;
  std::optional<std::filesystem::path> exposed_file;
  std::filesystem::path workdir;
  std::string path_env;
  std::optional<std::string> seed;
  int timeout_s = 86400;
};
int eval_safe(const EvalSafeRequest& request, std::ostream& out, std::ostream& err);

}  // namespace autograder
