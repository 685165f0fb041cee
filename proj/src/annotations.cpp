#include "autograder/annotations.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

#include "autograder/error.hpp"
#include "autograder/question.hpp"
#include "autograder/utf8.hpp"

namespace autograder {

namespace fs = std::filesystem;

namespace {

bool is_space(char c) { return c == ' ' || c == '\t'; }

bool is_tag_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

bool is_comment(std::string_view line, std::string_view leader) {
  const auto body = trim(line);
  return body.substr(0, leader.size()) == leader;
}

std::optional<double> parse_points(std::string_view text) {
  double value = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value) || value < 0) {
    return std::nullopt;
  }
  return value;
}

}  // namespace

std::optional<Annotation> parse_annotation_line(std::string_view line, std::string_view comment_leader) {
  if (comment_leader.empty()) return std::nullopt;
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

  std::size_t pos = 0;
  if (line.substr(0, comment_leader.size()) != comment_leader) return std::nullopt;
  while (line.substr(pos, comment_leader.size()) == comment_leader) pos += comment_leader.size();
  while (pos < line.size() && is_space(line[pos])) ++pos;

  if (pos >= line.size() || line[pos] != '@') return std::nullopt;
  const std::size_t tag_begin = ++pos;
  while (pos < line.size() && is_tag_char(line[pos])) ++pos;
  if (pos == tag_begin) return std::nullopt;
  const std::size_t tag_end = pos;

  if (pos >= line.size() || !is_space(line[pos])) return std::nullopt;
  const auto value = trim(line.substr(pos));
  if (value.empty()) return std::nullopt;

  return Annotation{std::string(line.substr(tag_begin, tag_end - tag_begin)), std::string(value)};
}

TestMetadata parse_test_header(std::string_view text, const std::string& file,
                               std::string_view comment_leader, Diagnostics& diagnostics) {
  TestMetadata meta{file, file, kDefaultMaxPoints};
  bool have_title = false;
  bool have_score = false;
  bool in_header = true;

  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    const std::string where = file + ":" + std::to_string(i + 1);

    if (in_header && !trim(line).empty() && !is_comment(line, comment_leader)) {
      in_header = false;
    }
    const auto annotation = parse_annotation_line(line, comment_leader);
    if (!annotation) continue;

    if (!in_header) {
      diagnostics.push_back(warning("@" + annotation->tag + " after code is ignored", where));
      continue;
    }
    if (annotation->tag == "title") {
      if (have_title) {
        diagnostics.push_back(warning("duplicate @title, first occurrence kept", where));
        continue;
      }
      meta.title = annotation->value;
      have_title = true;
    } else if (annotation->tag == "score") {
      const auto points = parse_points(annotation->value);
      if (!points) {
        throw GraderError(ErrorCode::MalformedScore,
                          "@score '" + annotation->value + "' is not a non-negative number at " + where,
                          where);
      }
      if (have_score) {
        diagnostics.push_back(warning("duplicate @score, first occurrence kept", where));
        continue;
      }
      meta.max_points = *points;
      have_score = true;
    } else {
      diagnostics.push_back(warning("unknown annotation @" + annotation->tag, where));
    }
  }
  return meta;
}

MetadataSet extract_metadata(std::span<const fs::path> test_files, std::string_view comment_leader) {
  if (comment_leader.empty()) {
    throw GraderError(ErrorCode::InvalidArgument, "comment leader must not be empty");
  }
  MetadataSet set;
  for (const auto& path : test_files) {
    const std::string text = sanitize_utf8(read_file(path));
    set.tests.push_back(
        parse_test_header(text, path.filename().string(), comment_leader, set.diagnostics));
  }
  return set;
}

MetadataSet extract_metadata(const fs::path& tests_dir, std::string_view comment_leader) {
  const auto files = list_regular_files(tests_dir);
  return extract_metadata(std::span<const fs::path>(files), comment_leader);
}

}  // namespace autograder
