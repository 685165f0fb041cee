#include "autograder/harness.hpp"

#include <signal.h>
#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "autograder/diff.hpp"
#include "autograder/error.hpp"
#include "autograder/utf8.hpp"

namespace autograder {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kTestPlaceholder = "{test_file}";
constexpr std::string_view kStudentPlaceholder = "{student_file}";
constexpr std::string_view kAnswerPlaceholder = "{answer_file}";

std::string replace_all(std::string text, std::string_view from, const std::string& to) {
  std::size_t pos = 0;
  while ((pos = text.find(from, pos)) != std::string::npos) {
    text.replace(pos, from.size(), to);
    pos += to.size();
  }
  return text;
}

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
  std::size_t n = 0;
  for (std::size_t pos = text.find(needle); pos != std::string_view::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

std::optional<std::string> shortest_number(std::string_view text) {
  if (text.empty()) return std::nullopt;
  double value = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value)) return std::nullopt;
  if (value == 0) value = 0;  // folds -0
  char buf[64];
  auto [out, ec2] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec2 != std::errc{}) return std::nullopt;
  return std::string(buf, out);
}

std::string describe_exit(const sandbox::RunOutcome& outcome, int timeout_s) {
  if (outcome.timed_out) return "timed out after " + std::to_string(timeout_s) + " s";
  if (outcome.term_signal) return "killed by signal " + std::to_string(*outcome.term_signal);
  if (outcome.exit_code && *outcome.exit_code != 0) {
    return "exited with status " + std::to_string(*outcome.exit_code);
  }
  return "no results reported";
}

}  // namespace

// ---------------------------------------------------------------------------
// LanguageBackend

void LanguageBackend::validate() const {
  std::size_t n = 0;
  for (const auto& arg : command_template) n += count_occurrences(arg, kTestPlaceholder);
  if (n != 1) {
    throw GraderError(ErrorCode::InvalidArgument,
                      "backend '" + name + "' must use {test_file} exactly once, found " + std::to_string(n));
  }
  if (command_template.front().empty()) {
    throw GraderError(ErrorCode::InvalidArgument, "backend '" + name + "' has an empty program");
  }
}

std::vector<std::string> LanguageBackend::instantiate(const std::string& test_file, const std::string& student_file,
                                                      const std::string& answer_file) const {
  std::vector<std::string> argv;
  for (const auto& arg : command_template) {
    std::string a = replace_all(arg, kTestPlaceholder, test_file);
    a = replace_all(std::move(a), kStudentPlaceholder, student_file);
    a = replace_all(std::move(a), kAnswerPlaceholder, answer_file);
    argv.push_back(std::move(a));
  }
  return argv;
}

LanguageBackend LanguageBackend::from_name_or_template(std::string_view text) {
  LanguageBackend backend;
  if (text == "sh") {
    backend = {"sh", {"sh", "{test_file}"}, "sh"};
  } else if (text == "bash") {
    backend = {"bash", {"bash", "{test_file}"}, "sh"};
  } else if (text == "python") {
    backend = {"python", {"python3", "{test_file}"}, "py"};
  } else if (text == "r" || text == "R") {
    backend = {"r", {"Rscript", "{test_file}"}, "R"};
  } else {
    std::istringstream in{std::string(text)};
    std::string word;
    backend.name = "custom";
    while (in >> word) backend.command_template.push_back(word);
    if (backend.command_template.empty()) {
      throw GraderError(ErrorCode::InvalidArgument, "empty backend template");
    }
  }
  backend.validate();
  return backend;
}

std::vector<std::string> LanguageBackend::builtin_names() { return {"sh", "bash", "python", "r"}; }

// ---------------------------------------------------------------------------
// Results as data

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Passed: return "Passed";
    case Outcome::Failed: return "Failed";
    case Outcome::Absent: return "Absent";
  }
  return "Absent";
}

Outcome classify(const std::vector<ExpectationRecord>& records) {
  if (records.empty()) return Outcome::Absent;
  const bool all = std::all_of(records.begin(), records.end(), [](const ExpectationRecord& r) { return r.passed; });
  return all ? Outcome::Passed : Outcome::Failed;
}

ParsedStream parse_result_stream(std::string_view stdout_text) {
  ParsedStream parsed;
  const auto lines = split_lines(sanitize_utf8(stdout_text));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string_view line = lines[i];
    if (line.substr(0, kRecordSentinel.size()) != kRecordSentinel) continue;

    auto malformed = [&](const std::string& why) {
      parsed.diagnostics.push_back(
          warning("MalformedRecord(" + std::to_string(i + 1) + "): " + why, "stdout:" + std::to_string(i + 1)));
    };
    json obj;
    try {
      obj = json::parse(line.substr(kRecordSentinel.size()));
    } catch (const json::parse_error&) {
      malformed("not valid JSON");
      continue;
    }
    if (!obj.is_object()) {
      malformed("not a JSON object");
      continue;
    }
    const auto passed = obj.find("passed");
    if (passed == obj.end() || !passed->is_boolean()) {
      malformed("'passed' must be a boolean");
      continue;
    }
    ExpectationRecord record;
    record.passed = passed->get<bool>();
    bool ok = true;
    for (auto [key, target] : {std::pair{"call", &record.call}, std::pair{"diff", &record.diff}}) {
      if (auto it = obj.find(key); it != obj.end()) {
        if (!it->is_string()) {
          malformed(std::string("'") + key + "' must be a string");
          ok = false;
          break;
        }
        *target = it->get<std::string>();
      }
    }
    if (!ok) continue;
    if (auto it = obj.find("info"); it != obj.end() && !it->is_null()) {
      if (!it->is_string()) {
        malformed("'info' must be a string");
        continue;
      }
      record.info = it->get<std::string>();
    }
    if (record.passed) record.diff.clear();
    parsed.records.push_back(std::move(record));
  }
  return parsed;
}

std::string format_record_line(const ExpectationRecord& record) {
  json obj = json::object();
  obj["passed"] = record.passed;
  obj["call"] = record.call;
  obj["diff"] = record.passed ? std::string() : record.diff;
  if (record.info) obj["info"] = *record.info;
  return std::string(kRecordSentinel) + obj.dump(-1, ' ', false, json::error_handler_t::replace);
}

// ---------------------------------------------------------------------------
// Seeds

std::int64_t daily_seed(std::chrono::year_month_day date) {
  return std::chrono::sys_days(date).time_since_epoch().count();
}

std::chrono::year_month_day today_utc() {
  return std::chrono::year_month_day(std::chrono::floor<std::chrono::days>(std::chrono::system_clock::now()));
}

std::chrono::year_month_day parse_date(std::string_view text) {
  auto bad = [&]() -> GraderError {
    return GraderError(ErrorCode::InvalidArgument, "expected a date as YYYY-MM-DD, got '" + std::string(text) + "'");
  };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') throw bad();
  auto field = [&](std::size_t pos, std::size_t len) {
    int v = 0;
    const char* b = text.data() + pos;
    auto [ptr, ec] = std::from_chars(b, b + len, v);
    if (ec != std::errc{} || ptr != b + len || *b == '-' || *b == '+') throw bad();
    return v;
  };
  const std::chrono::year_month_day date{std::chrono::year(field(0, 4)),
                                         std::chrono::month(static_cast<unsigned>(field(5, 2))),
                                         std::chrono::day(static_cast<unsigned>(field(8, 2)))};
  if (!date.ok()) throw bad();
  if (date < std::chrono::year_month_day{std::chrono::year(1970), std::chrono::January, std::chrono::day(1)}) {
    throw GraderError(ErrorCode::InvalidArgument, "date must not precede 1970-01-01");
  }
  return date;
}

// ---------------------------------------------------------------------------
// Comparison

std::vector<std::string> canonical_lines(std::string_view value_text) {
  std::vector<std::string> lines;
  for (auto& raw : split_lines(value_text)) {
    std::string_view line = raw;
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
    if (auto number = shortest_number(trim(line))) {
      lines.push_back(std::move(*number));
    } else {
      lines.emplace_back(line);
    }
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

ExpectationRecord compare_and_record(std::string_view expected, std::string_view actual, std::string call) {
  const auto want = canonical_lines(expected);
  const auto got = canonical_lines(actual);
  ExpectationRecord record;
  record.call = std::move(call);
  record.passed = want == got;
  if (!record.passed) {
    record.diff = diff::render_unified(diff::myers_diff(want, got));
  }
  return record;
}

// ---------------------------------------------------------------------------
// Running

std::optional<fs::path> pick_student_file(const std::vector<fs::path>& files, const LanguageBackend& backend) {
  if (files.empty()) return std::nullopt;
  if (!backend.file_extension.empty()) {
    const std::string ext = "." + backend.file_extension;
    for (const auto& f : files) {
      if (f.extension() == ext) return f;
    }
  }
  return files.front();
}

std::vector<TestResult> run_test_dir(const QuestionLayout& layout, const LanguageBackend& backend, std::int64_t seed,
                                     const HarnessOptions& options) {
  std::vector<TestResult> results;
  results.reserve(layout.test_files.size());

  const std::string answer =
      layout.reference_answer ? (options.job.run_dir / layout.reference_answer->filename()).string() : std::string();
  const auto student = pick_student_file(options.job.student_files, backend);
  const bool drop = options.isolation == sandbox::Isolation::FullPrivilegeDrop && options.grading_user;

  for (std::size_t index = 0; index < layout.test_files.size(); ++index) {
    TestResult result;
    result.file = layout.test_files[index].filename().string();
    try {
      backend.validate();
      const fs::path test_file = options.job.run_dir / "tests" / result.file;
      const fs::path workdir = sandbox::prepare_workdir(options.job, result.file);
      if (drop && ::lchown(workdir.c_str(), options.grading_user->uid, options.grading_user->gid) != 0) {
        result.diagnostics.push_back(warning("cannot hand workdir to grading user", workdir.string()));
      }
      const std::string student_file = student ? (workdir / student->filename()).string() : std::string();
      if (!student) result.diagnostics.push_back(warning("no student file to evaluate"));

      const std::int64_t test_seed = seed + (options.seed_offset_by_index ? static_cast<std::int64_t>(index) : 0);
      sandbox::SandboxSpec spec;
      spec.workdir = workdir;
      spec.command = backend.instantiate(test_file.string(), student_file, answer);
      spec.env = {
          {"PATH", options.path_env},
          {"HOME", workdir.string()},
          {env::kSeed, std::to_string(test_seed)},
          {env::kTestIndex, std::to_string(index)},
          {env::kStudentFile, student_file},
          {env::kAnswerFile, answer},
          {env::kHelper, options.helper_binary.string()},
          // Past our own kill deadline, so the outer timeout always decides.
          {env::kTimeout, std::to_string(options.timeout_s + options.grace_s + 1)},
      };
      if (drop) spec.env[env::kUser] = options.grading_user->name;
      spec.timeout_s = options.timeout_s;
      spec.grace_s = options.grace_s;
      spec.stdout_limit_bytes = options.stdout_limit_bytes;
      spec.stderr_limit_bytes = options.stderr_limit_bytes;
      spec.niceness = options.niceness;

      const auto outcome = sandbox::run_sandboxed(spec);
      if (student) {
        // A killed helper cannot restore the exposure itself.
        std::error_code ec;
        fs::permissions(student_file, fs::perms(0600), fs::perm_options::replace, ec);
      }
      auto parsed = parse_result_stream(outcome.stdout_data);
      result.records = std::move(parsed.records);
      result.diagnostics.insert(result.diagnostics.end(), parsed.diagnostics.begin(), parsed.diagnostics.end());
      result.diagnostics.insert(result.diagnostics.end(), outcome.diagnostics.begin(), outcome.diagnostics.end());
      result.raw_stderr = sanitize_utf8(outcome.stderr_data);
      result.duration_ms = outcome.duration_ms;
      result.timed_out = outcome.timed_out;
      result.outcome = classify(result.records);
      if (result.outcome == Outcome::Absent) result.absent_reason = describe_exit(outcome, options.timeout_s);
    } catch (const std::exception& e) {
      result.outcome = Outcome::Absent;
      result.records.clear();
      result.absent_reason = sanitize_utf8(e.what());
    }
    results.push_back(std::move(result));
  }
  return results;
}

int eval_safe(const EvalSafeRequest& request, std::ostream& out, std::ostream& err) {
  sandbox::SandboxSpec spec;
  spec.workdir = request.workdir;
  spec.command = request.command;
  spec.env = {{"PATH", request.path_env}, {"HOME", request.workdir.string()}};
  if (request.seed) spec.env[std::string(kSeedVariable)] = *request.seed;
  if (request.user && !request.user->empty()) spec.run_as_user = request.user;
  if (request.exposed_file) spec.exposed_files.push_back({*request.exposed_file});
  spec.timeout_s = request.timeout_s;
  spec.own_process_group = false;

  // The enclosing runner signals our whole process group on timeout. Outliving
  // the child lets the exposure guard put the file mode back.
  struct sigaction ignore {};
  ignore.sa_handler = SIG_IGN;
  struct sigaction previous {};
  ::sigaction(SIGTERM, &ignore, &previous);
  struct Restore {
    struct sigaction* saved;
    ~Restore() { ::sigaction(SIGTERM, saved, nullptr); }
  } restore{&previous};

  const auto outcome = sandbox::run_sandboxed(spec);
  out << outcome.stdout_data;
  err << outcome.stderr_data;
  for (const auto& d : outcome.diagnostics) err << ("[eval-safe] " + format(d) + "\n");
  out.flush();
  err.flush();
  if (outcome.exit_code) return *outcome.exit_code;
  if (outcome.term_signal) return 128 + *outcome.term_signal;
  return 1;
}

}  // namespace autograder
