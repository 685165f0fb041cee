// grader: external autograding engine.
//
//   grader grade    [--job-dir DIR] [--backend NAME|TEMPLATE] [--user NAME]
//                   [--strict-isolation] [--date YYYY-MM-DD] [--color]
//   grader inspect  QUESTION_DIR
//   grader validate QUESTION_DIR
//
// Helpers for test scripts running under `grade`:
//   grader eval-safe [--user U] [--expose FILE] [--timeout S] -- CMD ARGS...
//   grader expect-equal --call TEXT [--] EXPECTED ACTUAL

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "autograder/harness.hpp"
#include "autograder/orchestrator.hpp"

namespace fs = std::filesystem;
using namespace autograder;

namespace {

std::string env_or(const char* name, std::string fallback) {
  const char* value = std::getenv(name);
  return value != nullptr ? std::string(value) : fallback;
}

fs::path self_path(const char* argv0) {
  std::error_code ec;
  auto p = fs::read_symlink("/proc/self/exe", ec);
  if (!ec) return p;
  return fs::absolute(argv0);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"External autograder: grades a submission against a question directory"};
  app.require_subcommand(1);

  // grade
  auto* grade_cmd = app.add_subcommand("grade", "Stage, lock down, run tests and write results.json");
  std::string job_dir;
  std::string backend = "sh";
  std::string user{sandbox::kDefaultGradingUser};
  bool strict = false;
  std::string date;
  bool color = false;
  int grace = sandbox::kDefaultGraceSeconds;
  std::optional<int> niceness;
  bool seed_offset = false;
  grade_cmd->add_option("--job-dir", job_dir, "Job directory (default: $JOB_DIR or /grade/)");
  grade_cmd->add_option("--backend", backend, "Backend name (sh, bash, python, r) or command template")
      ->capture_default_str();
  grade_cmd->add_option("--user", user, "Grading user for untrusted code")->capture_default_str();
  grade_cmd->add_flag("--strict-isolation", strict, "Fail instead of degrading when root is unavailable");
  grade_cmd->add_option("--date", date, "Date for the daily seed, YYYY-MM-DD (default: today, UTC)");
  grade_cmd->add_flag("--color", color, "Colorize the log");
  grade_cmd->add_option("--grace", grace, "Seconds between SIGTERM and SIGKILL")->capture_default_str();
  grade_cmd->add_option("--nice", niceness, "Niceness increment for test processes");
  grade_cmd->add_flag("--seed-offset-by-index", seed_offset, "Add each test's index to the seed");

  // inspect / validate
  auto* inspect_cmd = app.add_subcommand("inspect", "List test titles and points of a question");
  std::string inspect_root;
  inspect_cmd->add_option("question", inspect_root, "Question directory")->required();
  inspect_cmd->add_flag("--color", color, "Colorize diagnostics");

  auto* validate_cmd = app.add_subcommand("validate", "Check a question directory; nonzero exit on errors");
  std::string validate_root;
  validate_cmd->add_option("question", validate_root, "Question directory")->required();
  validate_cmd->add_flag("--color", color, "Colorize diagnostics");

  // eval-safe
  auto* eval_cmd = app.add_subcommand("eval-safe", "Run a command as the grading user with the student file exposed");
  std::string eval_user = env_or(env::kUser, "");
  std::string eval_expose = env_or(env::kStudentFile, "");
  int eval_timeout = std::atoi(env_or(env::kTimeout, "86400").c_str());
  std::vector<std::string> eval_command;
  eval_cmd->add_option("--user", eval_user, "User to run as (default: $GRADER_USER; empty keeps the current user)");
  eval_cmd->add_option("--expose", eval_expose, "File made readable during the run (default: $GRADER_STUDENT_FILE)");
  eval_cmd->add_option("--timeout", eval_timeout, "Seconds before the command is killed (default: $GRADER_TIMEOUT)");
  eval_cmd->add_option("command", eval_command, "Command and arguments")->required()->expected(-1);

  // expect-equal
  auto* expect_cmd = app.add_subcommand("expect-equal", "Compare two values and print one result record");
  std::string call;
  std::string info;
  std::string expected, actual;
  expect_cmd->add_option("--call", call, "Expression text shown in feedback");
  expect_cmd->add_option("--info", info, "Extra note attached to the record");
  expect_cmd->add_option("expected", expected, "Expected value text")->required();
  expect_cmd->add_option("actual", actual, "Actual value text")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*grade_cmd) {
      GraderConfig config;
      config.job_dir = job_dir.empty() ? default_job_dir() : fs::path(job_dir);
      config.backend = LanguageBackend::from_name_or_template(backend);
      config.grading_user = user;
      config.strict_isolation = strict;
      if (!date.empty()) config.date_override = parse_date(date);
      config.color = color;
      config.helper_binary = self_path(argv[0]);
      config.grace_s = grace;
      config.niceness = niceness;
      config.seed_offset_by_index = seed_offset;
      return grade(config, std::cerr);
    }
    if (*inspect_cmd) return inspect(inspect_root, std::cout, std::cerr, color);
    if (*validate_cmd) return validate(validate_root, std::cout, std::cerr, color);
    if (*eval_cmd) {
      EvalSafeRequest request;
      request.command = eval_command;
      if (!eval_user.empty()) request.user = eval_user;
      if (!eval_expose.empty()) request.exposed_file = fs::absolute(eval_expose);
      request.workdir = fs::current_path();
      request.path_env = env_or("PATH", "/usr/bin:/bin");
      if (const char* seed = std::getenv(env::kSeed)) request.seed = seed;
      request.timeout_s = eval_timeout > 0 ? eval_timeout : 86400;
      return eval_safe(request, std::cout, std::cerr);
    }
    if (*expect_cmd) {
      auto record = compare_and_record(expected, actual, call);
      if (!info.empty()) record.info = info;
      std::cout << format_record_line(record) << std::endl;
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "grader: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
