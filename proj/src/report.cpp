#include "autograder/report.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <map>

#include <json.hpp>

#include "autograder/error.hpp"
#include "autograder/utf8.hpp"

namespace autograder {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

// Integral values print without a fractional part; others use the shortest
// representation that round-trips.
ordered_json number(double value) {
  if (std::isfinite(value) && value == std::trunc(value) && std::fabs(value) < 9007199254740992.0) {
    return static_cast<std::int64_t>(value);
  }
  return value;
}

std::string tail_lines(const std::string& text, std::size_t count) {
  auto lines = split_lines(text);
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  const std::size_t first = lines.size() > count ? lines.size() - count : 0;
  std::string out;
  for (std::size_t i = first; i < lines.size(); ++i) {
    if (i != first) out += '\n';
    out += lines[i];
  }
  return out;
}

std::string dump(const ordered_json& value) {
  return value.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
}

}  // namespace

std::string feedback_for(const TestResult& result) {
  switch (result.outcome) {
    case Outcome::Passed:
      return {};
    case Outcome::Failed: {
      std::string out;
      for (const auto& record : result.records) {
        if (record.passed) continue;
        if (!out.empty()) out += '\n';
        out += record.call;
        if (!record.diff.empty()) {
          if (!record.call.empty()) out += '\n';
          out += record.diff;
        }
      }
      return out.empty() ? std::string("expectation failed") : out;
    }
    case Outcome::Absent: {
      std::string out(kAbsentPrefix);
      out += result.absent_reason.empty() ? "no results reported" : result.absent_reason;
      const std::string tail = tail_lines(result.raw_stderr, kStderrTailLines);
      if (!tail.empty()) out += "\n" + tail;
      return out;
    }
  }
  return {};
}

GradingReport aggregate(std::span<const TestResult> results, std::span<const TestMetadata> metadata,
                        Diagnostics* notes) {
  struct Row {
    const TestMetadata* meta = nullptr;
    const TestResult* result = nullptr;
  };
  std::map<std::string, Row> rows;  // ordered by file name
  for (const auto& m : metadata) {
    auto& row = rows[m.file];
    if (row.meta != nullptr && notes != nullptr) notes->push_back(warning("duplicate metadata row", m.file));
    if (row.meta == nullptr) row.meta = &m;
  }
  for (const auto& r : results) {
    auto& row = rows[r.file];
    if (row.result != nullptr && notes != nullptr) notes->push_back(warning("duplicate result row", r.file));
    if (row.result == nullptr) row.result = &r;
  }

  GradingReport report;
  double total = 0;
  double earned = 0;
  for (const auto& [file, row] : rows) {
    GradedTest test;
    if (row.meta != nullptr) {
      test.name = row.meta->title;
      test.max_points = row.meta->max_points;
    } else {
      test.name = file;
      test.max_points = kDefaultMaxPoints;
      if (notes != nullptr) notes->push_back(warning("result without metadata, default points used", file));
    }
    if (row.result != nullptr && row.result->outcome == Outcome::Passed) {
      test.points = test.max_points;
    } else if (row.result != nullptr) {
      test.output = feedback_for(*row.result);
    } else {
      test.output = std::string(kAbsentPrefix) + "no result was recorded for this test";
    }
    total += test.max_points;
    earned += test.points;
    report.tests.push_back(std::move(test));
  }

  if (!(total > 0)) {
    throw GraderError(ErrorCode::NoPointsDefined, "the tests define no points");
  }
  report.score = earned / total;
  report.succeeded = true;
  return report;
}

GradingReport catastrophic_report(std::string_view reason) {
  GradingReport report;
  report.succeeded = false;
  report.score = 0;
  report.message = reason.empty() ? std::string(kCatastrophicMessage) : std::string(reason);
  return report;
}

GradingReport error_to_report(std::string_view message, double max_points_total) {
  GradingReport report;
  report.tests.push_back({"Error", max_points_total, 0, std::string(message)});
  report.score = 0;
  report.succeeded = false;
  report.message = message.empty() ? std::string("Error") : std::string(message);
  return report;
}

std::string serialize_report(const GradingReport& report) {
  if (!report.succeeded && report.tests.empty()) {
    // Same bytes as the shell fallback document.
    const std::string message = report.message.value_or(std::string(kCatastrophicMessage));
    return "{\"succeeded\": false, \"score\": 0.0, \"message\": " + dump(ordered_json(message)) + "}\n";
  }
  ordered_json doc = ordered_json::object();
  doc["tests"] = ordered_json::array();
  for (const auto& t : report.tests) {
    ordered_json row = ordered_json::object();
    row["name"] = t.name;
    row["max_points"] = number(t.max_points);
    row["points"] = number(t.points);
    row["output"] = t.output;
    doc["tests"].push_back(std::move(row));
  }
  doc["score"] = number(report.succeeded ? report.score : 0.0);
  doc["succeeded"] = report.succeeded;
  return dump(doc) + "\n";
}

void write_file_atomically(const fs::path& path, std::string_view bytes) {
  auto fail = [&](const std::string& cause) -> GraderError {
    return GraderError(ErrorCode::WriteFailure, "cannot write " + path.string() + ": " + cause, path.string());
  };
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::string tmpl = (dir / ("." + path.filename().string() + ".XXXXXX")).string();
  const int fd = ::mkstemp(tmpl.data());
  if (fd < 0) throw fail(std::strerror(errno));

  std::size_t written = 0;
  while (written < bytes.size()) {
    const ssize_t n = ::write(fd, bytes.data() + written, bytes.size() - written);
    if (n < 0 && errno == EINTR) continue;
    if (n < 0) {
      const std::string cause = std::strerror(errno);
      ::close(fd);
      ::unlink(tmpl.c_str());
      throw fail(cause);
    }
    written += static_cast<std::size_t>(n);
  }
  ::fchmod(fd, 0644);
  if (::fsync(fd) != 0 || ::close(fd) != 0) {
    const std::string cause = std::strerror(errno);
    ::unlink(tmpl.c_str());
    throw fail(cause);
  }
  if (::rename(tmpl.c_str(), path.c_str()) != 0) {
    const std::string cause = std::strerror(errno);
    ::unlink(tmpl.c_str());
    throw fail(cause);
  }
}

void emit_results(const GradingReport& report, const fs::path& path) {
  write_file_atomically(path, serialize_report(report));
}

}  // namespace autograder
