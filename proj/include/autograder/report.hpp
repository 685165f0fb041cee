#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "autograder/annotations.hpp"
#include "autograder/diagnostic.hpp"
#include "autograder/harness.hpp"

namespace autograder {

struct GradedTest {
  std::string name;
  double max_points = 0;
  double points = 0;
  std::string output;

  bool operator==(const GradedTest&) const = default;
};

struct GradingReport {
  std::vector<GradedTest> tests;
  double score = 0;
  bool succeeded = false;
  std::optional<std::string> message;

  bool operator==(const GradingReport&) const = default;
};

inline constexpr std::string_view kCatastrophicMessage =
    "Catastrophic failure! Contact course staff and have them check the logs for this submission.";
inline constexpr std::string_view kAbsentPrefix = "test did not complete: ";
inline constexpr std::size_t kStderrTailLines = 20;

// Full outer join of results and metadata on the file name, all-or-nothing
// points, rows ordered by file name. Results without metadata get the default
// point value and a diagnostic in `notes`. Throws GraderError(NoPointsDefined)
// when the joined rows carry no points.
GradingReport aggregate(std::span<const TestResult> results, std::span<const TestMetadata> metadata,
                        Diagnostics* notes = nullptr);

// Feedback text for one joined row.
std::string feedback_for(const TestResult& result);

GradingReport catastrophic_report(std::string_view reason = {});

// A single "Error" row worth `max_points_total`, carrying `message`.
GradingReport error_to_report(std::string_view message, double max_points_total);

// The exact bytes emit_results writes.
std::string serialize_report(const GradingReport& report);

// Atomic write (temporary file in the same directory, then rename).
// Throws GraderError(WriteFailure).
void emit_results(const GradingReport& report, const std::filesystem::path& path);

void write_file_atomically(const std::filesystem::path& path, std::string_view bytes);

}  // namespace autograder
