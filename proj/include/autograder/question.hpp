#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "autograder/diagnostic.hpp"

namespace autograder {

enum class GradingMethod { External, Internal, Manual, Other };

// Parsed info.json. Paths are stored verbatim; nothing here is resolved.
struct QuestionInfo {
  std::string uuid;
  std::string title;
  std::string topic;
  std::vector<std::string> tags;
  GradingMethod grading_method = GradingMethod::Internal;
  std::string grading_method_text;  // as written, for diagnostics
  std::string image;
  std::string entrypoint;
  std::vector<std::string> server_files;
  int timeout_s = 5;
  // Unrecognized keys, kept as-is.
  nlohmann::json extra = nlohmann::json::object();

  bool operator==(const QuestionInfo&) const = default;
};

struct QuestionLayout {
  std::filesystem::path root;
  QuestionInfo info;
  std::optional<std::filesystem::path> reference_answer;
  std::filesystem::path tests_dir;
  std::vector<std::filesystem::path> test_files;  // sorted by file name, byte order
  // Findings made while loading (extra answer files, nested directories, ...).
  Diagnostics load_notes;

  bool operator==(const QuestionLayout&) const = default;
};

struct LoadOptions {
  // When false, a missing info.json yields default QuestionInfo values
  // instead of MissingInfoJson.
  bool require_info = true;
};

bool is_valid_uuid(std::string_view text);

// Parses info.json text. Throws GraderError(MalformedInfoJson) naming the field.
QuestionInfo parse_question_info(std::string_view json_text);

// Throws GraderError: MissingInfoJson, MalformedInfoJson, MissingTestsDir,
// EmptyTestsDir.
QuestionLayout load_question(const std::filesystem::path& root, const LoadOptions& options = {});

Diagnostics validate_layout(const QuestionLayout& layout);

// Direct regular files of `dir`, sorted by file name. Anything else is
// reported through `skipped` when given.
std::vector<std::filesystem::path> list_regular_files(const std::filesystem::path& dir,
                                                      Diagnostics* skipped = nullptr);

}  // namespace autograder
