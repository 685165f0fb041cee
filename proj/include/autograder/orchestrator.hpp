#pragma once

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "autograder/harness.hpp"
#include "autograder/report.hpp"

namespace autograder {

struct GraderConfig {
  std::filesystem::path job_dir;
  LanguageBackend backend = LanguageBackend::from_name_or_template("sh");
  std::string grading_user{sandbox::kDefaultGradingUser};
  bool strict_isolation = false;
  std::optional<std::chrono::year_month_day> date_override;
  bool color = false;
  // Executable that provides the eval-safe / expect-equal helpers.
  std::filesystem::path helper_binary;
  int grace_s = sandbox::kDefaultGraceSeconds;
  std::optional<int> niceness;
  bool seed_offset_by_index = false;
};

inline constexpr std::string_view kDefaultJobDir = "/grade/";

// JOB_DIR from the environment, else /grade/.
std::filesystem::path default_job_dir();

// <job_dir>/results/results.json
std::filesystem::path results_path(const std::filesystem::path& job_dir);

// Stage, lock down, run, aggregate, emit. Always attempts to leave a results
// document behind. Returns 0 whenever one was written, 1 only when even the
// fallback document could not be written. Progress goes to `log`.
int grade(const GraderConfig& config, std::ostream& log);

// Everything but the final write: the report grade() would emit.
GradingReport grade_report(const GraderConfig& config, std::ostream& log);

// Lists test files with titles and points. Nonzero exit when the question
// cannot be loaded.
int inspect(const std::filesystem::path& question_root, std::ostream& out, std::ostream& err, bool color = false);

// Prints diagnostics; exit 0 iff none is error-level.
int validate(const std::filesystem::path& question_root, std::ostream& out, std::ostream& err, bool color = false);

// Marks '-'/'+'/'@@' lines of feedback text with ANSI colors.
std::string colorize_feedback(std::string_view text);

}  // namespace autograder
