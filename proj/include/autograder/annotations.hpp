#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "autograder/diagnostic.hpp"

namespace autograder {

// Display title and point value of one test file, keyed by its base name.
struct TestMetadata {
  std::string file;
  std::string title;
  double max_points = 1.0;

  bool operator==(const TestMetadata&) const = default;
};

struct Annotation {
  std::string tag;
  std::string value;

  bool operator==(const Annotation&) const = default;
};

struct MetadataSet {
  std::vector<TestMetadata> tests;
  Diagnostics diagnostics;
};

inline constexpr std::string_view kDefaultCommentLeader = "#";
inline constexpr double kDefaultMaxPoints = 1.0;

// Matches `<leader>+ ws* @<tag> ws+ <value>`; value is the trimmed remainder.
std::optional<Annotation> parse_annotation_line(std::string_view line,
                                                std::string_view comment_leader = kDefaultCommentLeader);

// Scans the leading comment block of `text` (up to the first line that is
// neither blank nor a comment). `file` is used as the join key and default
// title. Throws GraderError(MalformedScore) for a bad @score value.
TestMetadata parse_test_header(std::string_view text, const std::string& file,
                               std::string_view comment_leader, Diagnostics& diagnostics);

// One entry per file, in the given order. Throws UnreadableFile or
// MalformedScore.
MetadataSet extract_metadata(std::span<const std::filesystem::path> test_files,
                             std::string_view comment_leader = kDefaultCommentLeader);

// Same, over the direct regular files of `tests_dir` sorted by name.
MetadataSet extract_metadata(const std::filesystem::path& tests_dir,
                             std::string_view comment_leader = kDefaultCommentLeader);

}  // namespace autograder
