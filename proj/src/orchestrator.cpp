#include "autograder/orchestrator.hpp"

#include <sys/stat.h>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <ostream>

#include "autograder/annotations.hpp"
#include "autograder/error.hpp"
#include "autograder/question.hpp"
#include "autograder/utf8.hpp"

namespace autograder {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kRed = "\x1b[31m";
constexpr std::string_view kGreen = "\x1b[32m";
constexpr std::string_view kYellow = "\x1b[33m";
constexpr std::string_view kCyan = "\x1b[36m";
constexpr std::string_view kReset = "\x1b[0m";

std::string points_text(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return ec == std::errc{} ? std::string(buf, end) : std::to_string(value);
}

std::string show(const Diagnostic& d, bool color) {
  if (!color) return format(d);
  return std::string(d.severity == Severity::Error ? kRed : kYellow) + format(d) + std::string(kReset);
}

std::string indent(std::string_view text) {
  std::string out;
  for (const auto& line : split_lines(text)) out += "    " + line + "\n";
  return out;
}

sandbox::LockdownPlan plan_for(const sandbox::StagedJob& job, const fs::path& job_tests) {
  sandbox::LockdownPlan plan;
  plan.root_owned_paths.push_back(job_tests);
  for (const auto& entry : fs::directory_iterator(job.run_dir)) {
    if (entry.path() == job.bin_dir || entry.path() == job.work_root) continue;
    plan.root_owned_paths.push_back(entry.path());
  }
  for (const auto& file : job.student_files) plan.root_owned_paths.push_back(file);
  std::sort(plan.root_owned_paths.begin(), plan.root_owned_paths.end());
  return plan;
}

}  // namespace

fs::path default_job_dir() {
  if (const char* env = std::getenv("JOB_DIR"); env != nullptr && *env != '\0') return fs::path(env);
  return fs::path(kDefaultJobDir);
}

fs::path results_path(const fs::path& job_dir) { return job_dir / "results" / "results.json"; }

std::string colorize_feedback(std::string_view text) {
  std::string out;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (i != 0) out += '\n';
    if (line.starts_with("@@")) {
      out += std::string(kCyan) + line + std::string(kReset);
    } else if (line.starts_with("-")) {
      out += std::string(kRed) + line + std::string(kReset);
    } else if (line.starts_with("+")) {
      out += std::string(kGreen) + line + std::string(kReset);
    } else {
      out += line;
    }
  }
  return out;
}

GradingReport grade_report(const GraderConfig& config, std::ostream& log) {
  const fs::path& job_dir = config.job_dir;
  if (!job_dir.is_absolute()) {
    throw GraderError(ErrorCode::InvalidArgument, "job directory must be absolute: " + job_dir.string());
  }

  log << "[init] loading question from " << job_dir.string() << '\n';
  const QuestionLayout layout = load_question(job_dir, {.require_info = false});
  const Diagnostics layout_notes = validate_layout(layout);
  for (const auto& d : layout_notes) log << "[init] " << show(d, config.color) << '\n';
  if (has_errors(layout_notes)) {
    throw GraderError(ErrorCode::InvalidArgument, "question directory is not gradable");
  }

  config.backend.validate();
  HarnessOptions options;
  const std::string program = config.backend.command_template.front();
  if (!sandbox::resolve_executable(program, options.path_env)) {
    log << "[init] backend program not found: " << program << '\n';
    throw GraderError(ErrorCode::SpawnFailure, "backend program not found: " + program, program);
  }

  MetadataSet metadata;
  try {
    metadata = extract_metadata(std::span<const fs::path>(layout.test_files));
  } catch (const GraderError& e) {
    log << "[init] cannot read test metadata: " << e.what() << '\n';
    return error_to_report(e.what(), 100);
  }
  for (const auto& d : metadata.diagnostics) log << "[init] " << show(d, config.color) << '\n';

  log << "[init] making directories\n";
  log << "[init] copying content\n";
  const fs::path autograder_dir = job_dir / "serverFilesCourse";
  auto job = sandbox::stage_job(job_dir / "student", autograder_dir, job_dir / "tests", job_dir);
  for (const auto& d : job.diagnostics) log << "[init] " << show(d, config.color) << '\n';

  log << "[init] locking down test files\n";
  const auto receipt = sandbox::apply_lockdown(
      plan_for(job, job_dir / "tests"), {.grading_user = config.grading_user, .strict = config.strict_isolation, .privileged = std::nullopt});
  for (const auto& d : receipt.diagnostics) log << "[init] " << show(d, config.color) << '\n';
  log << "[init] isolation: " << sandbox::to_string(receipt.isolation) << '\n';
  if (receipt.isolation == sandbox::Isolation::FullPrivilegeDrop) {
    struct stat st {};
    if (::stat(job_dir.c_str(), &st) == 0 && (st.st_mode & S_IXOTH) == 0) {
      log << "[init] " << show(warning("job directory is not searchable by the grading user", job_dir.string()), config.color)
          << '\n';
    }
  }

  const auto date = config.date_override.value_or(today_utc());
  const std::int64_t seed = daily_seed(date);

  options.job = job;
  options.isolation = receipt.isolation;
  options.grading_user = receipt.grading_user;
  options.timeout_s = layout.info.timeout_s;
  options.grace_s = config.grace_s;
  options.niceness = config.niceness;
  options.helper_binary = config.helper_binary;
  options.seed_offset_by_index = config.seed_offset_by_index;

  log << "[run] starting autograder\n";
  log << "[run] backend " << config.backend.name << ", seed " << seed << ", timeout " << options.timeout_s << " s\n";
  const auto results = run_test_dir(layout, config.backend, seed, options);
  for (const auto& r : results) {
    log << "[run] " << r.file << ": " << to_string(r.outcome) << " (" << r.duration_ms << " ms)\n";
    for (const auto& d : r.diagnostics) log << "[run]   " << show(d, config.color) << '\n';
    const std::string feedback = feedback_for(r);
    if (!feedback.empty()) log << indent(config.color ? colorize_feedback(feedback) : feedback);
  }

  Diagnostics join_notes;
  GradingReport report;
  try {
    report = aggregate(results, metadata.tests, &join_notes);
  } catch (const GraderError& e) {
    if (e.code() != ErrorCode::NoPointsDefined) throw;
    log << "[run] " << e.what() << '\n';
    return catastrophic_report("No points are defined for this question.");
  }
  for (const auto& d : join_notes) log << "[run] " << show(d, config.color) << '\n';
  log << "[run] autograder completed, score " << report.score << '\n';
  return report;
}

int grade(const GraderConfig& config, std::ostream& log) {
  const fs::path target = results_path(config.job_dir);
  GradingReport report;
  try {
    report = grade_report(config, log);
  } catch (const std::exception& e) {
    log << "[run] grading failed: " << e.what() << '\n';
    report = catastrophic_report();
  } catch (...) {
    log << "[run] grading failed with an unknown error\n";
    report = catastrophic_report();
  }

  try {
    fs::create_directories(target.parent_path());
    emit_results(report, target);
    log << "[run] copied results to " << target.string() << '\n';
    return 0;
  } catch (const std::exception& e) {
    log << "[run] cannot write results: " << e.what() << '\n';
  }

  // Last resort: the fixed fallback document, written directly.
  std::ofstream out(target, std::ios::binary | std::ios::trunc);
  out << serialize_report(catastrophic_report());
  out.close();
  if (out) {
    log << "[run] wrote fallback results to " << target.string() << '\n';
    return 0;
  }
  log << "[run] fallback results could not be written\n";
  return 1;
}

int inspect(const fs::path& question_root, std::ostream& out, std::ostream& err, bool color) {
  QuestionLayout layout;
  MetadataSet metadata;
  try {
    layout = load_question(question_root);
    metadata = extract_metadata(std::span<const fs::path>(layout.test_files));
  } catch (const std::exception& e) {
    err << show(error(e.what(), question_root.string()), color) << '\n';
    return 1;
  }

  std::size_t file_width = 4, title_width = 5;
  for (const auto& t : metadata.tests) {
    file_width = std::max(file_width, t.file.size());
    title_width = std::max(title_width, t.title.size());
  }
  auto pad = [](std::string s, std::size_t w) {
    s.resize(std::max(s.size(), w), ' ');
    return s;
  };

  out << layout.info.title << " (" << layout.info.uuid << ")\n";
  out << pad("file", file_width) << "  " << pad("title", title_width) << "  points\n";
  double total = 0;
  for (const auto& t : metadata.tests) {
    out << pad(t.file, file_width) << "  " << pad(t.title, title_width) << "  " << points_text(t.max_points) << '\n';
    total += t.max_points;
  }
  out << "total points: " << points_text(total) << '\n';
  Diagnostics all = validate_layout(layout);
  all.insert(all.end(), metadata.diagnostics.begin(), metadata.diagnostics.end());
  for (const auto& d : all) out << show(d, color) << '\n';
  return 0;
}

int validate(const fs::path& question_root, std::ostream& out, std::ostream& err, bool color) {
  Diagnostics all;
  try {
    const QuestionLayout layout = load_question(question_root);
    all = validate_layout(layout);
    try {
      const auto metadata = extract_metadata(std::span<const fs::path>(layout.test_files));
      all.insert(all.end(), metadata.diagnostics.begin(), metadata.diagnostics.end());
    } catch (const GraderError& e) {
      all.push_back(error(e.what(), e.subject()));
    }
  } catch (const GraderError& e) {
    all.push_back(error(e.what(), e.subject()));
  } catch (const std::exception& e) {
    all.push_back(error(e.what(), question_root.string()));
  }

  for (const auto& d : all) (d.severity == Severity::Error ? err : out) << show(d, color) << '\n';
  if (has_errors(all)) return 1;
  out << "ok: " << question_root.string() << '\n';
  return 0;
}

}  // namespace autograder
