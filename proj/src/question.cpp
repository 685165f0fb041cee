#include "autograder/question.hpp"

#include <algorithm>
#include <cctype>

#include "autograder/error.hpp"
#include "autograder/utf8.hpp"

namespace autograder {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void malformed(const std::string& field, const std::string& why) {
  throw GraderError(ErrorCode::MalformedInfoJson, "field '" + field + "' " + why, field);
}

std::string string_field(const json& obj, const char* key, const std::string& field, bool required) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (required) malformed(field, "is missing");
    return {};
  }
  if (!it->is_string()) malformed(field, "must be a string");
  return it->get<std::string>();
}

std::vector<std::string> string_list(const json& obj, const char* key, const std::string& field) {
  auto it = obj.find(key);
  if (it == obj.end()) return {};
  if (!it->is_array()) malformed(field, "must be an array of strings");
  std::vector<std::string> out;
  for (const auto& item : *it) {
    if (!item.is_string()) malformed(field, "must be an array of strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

GradingMethod parse_method(const std::string& text) {
  if (text == "External") return GradingMethod::External;
  if (text == "Internal") return GradingMethod::Internal;
  if (text == "Manual") return GradingMethod::Manual;
  return GradingMethod::Other;
}

bool by_file_name(const fs::path& a, const fs::path& b) {
  return a.filename().string() < b.filename().string();
}

}  // namespace

bool is_valid_uuid(std::string_view text) {
  if (text.size() != 36) return false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (i == 8 || i == 13 || i == 18 || i == 23) {
      if (text[i] != '-') return false;
    } else if (!std::isxdigit(static_cast<unsigned char>(text[i]))) {
      return false;
    }
  }
  return true;
}

QuestionInfo parse_question_info(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    malformed("<document>", std::string("is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) malformed("<document>", "must be a JSON object");

  QuestionInfo info;
  info.uuid = string_field(doc, "uuid", "uuid", true);
  if (!is_valid_uuid(info.uuid)) malformed("uuid", "is not a UUID: '" + info.uuid + "'");
  info.title = string_field(doc, "title", "title", true);
  info.topic = string_field(doc, "topic", "topic", false);
  info.tags = string_list(doc, "tags", "tags");

  // PrairieLearn's own default when the key is absent.
  info.grading_method_text = doc.contains("gradingMethod")
                                 ? string_field(doc, "gradingMethod", "gradingMethod", true)
                                 : "Internal";
  info.grading_method = parse_method(info.grading_method_text);

  static const std::vector<std::string> known = {"uuid", "title", "topic", "tags", "gradingMethod",
                                                 "externalGradingOptions"};

  if (auto it = doc.find("externalGradingOptions"); it != doc.end()) {
    const json& opts = *it;
    if (!opts.is_object()) malformed("externalGradingOptions", "must be an object");
    info.image = string_field(opts, "image", "externalGradingOptions.image", false);
    info.entrypoint = string_field(opts, "entrypoint", "externalGradingOptions.entrypoint", false);
    info.server_files =
        string_list(opts, "serverFilesCourse", "externalGradingOptions.serverFilesCourse");
    if (auto t = opts.find("timeout"); t != opts.end()) {
      if (!t->is_number_integer() || t->get<long long>() < 1 || t->get<long long>() > 86400) {
        malformed("externalGradingOptions.timeout", "must be a positive integer number of seconds");
      }
      info.timeout_s = static_cast<int>(t->get<long long>());
    }
    for (const auto& [key, value] : opts.items()) {
      if (key != "image" && key != "entrypoint" && key != "serverFilesCourse" && key != "timeout") {
        info.extra["externalGradingOptions"][key] = value;
      }
    }
  }

  for (const auto& [key, value] : doc.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      info.extra[key] = value;
    }
  }
  return info;
}

std::vector<fs::path> list_regular_files(const fs::path& dir, Diagnostics* skipped) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file()) {
      files.push_back(entry.path());
    } else if (skipped != nullptr) {
      skipped->push_back(warning("not a regular file, ignored", entry.path().string()));
    }
  }
  std::sort(files.begin(), files.end(), by_file_name);
  if (skipped != nullptr) {
    std::sort(skipped->begin(), skipped->end(),
              [](const Diagnostic& a, const Diagnostic& b) { return a.path < b.path; });
  }
  return files;
}

QuestionLayout load_question(const fs::path& root, const LoadOptions& options) {
  QuestionLayout layout;
  layout.root = root;

  const fs::path info_path = root / "info.json";
  if (fs::is_regular_file(info_path)) {
    layout.info = parse_question_info(sanitize_utf8(read_file(info_path)));
  } else if (options.require_info) {
    throw GraderError(ErrorCode::MissingInfoJson, "no info.json in " + root.string(),
                      info_path.string());
  } else {
    layout.info.uuid = "00000000-0000-0000-0000-000000000000";
    layout.info.title = root.filename().string();
    layout.info.grading_method = GradingMethod::External;
    layout.info.grading_method_text = "External";
    layout.load_notes.push_back(warning("info.json absent, using defaults", info_path.string()));
  }

  const fs::path tests_root = root / "tests";
  layout.tests_dir = tests_root / "tests";
  if (!fs::is_directory(layout.tests_dir)) {
    throw GraderError(ErrorCode::MissingTestsDir, "missing tests directory " + layout.tests_dir.string(),
                      layout.tests_dir.string());
  }

  Diagnostics nested;
  layout.test_files = list_regular_files(layout.tests_dir, &nested);
  for (auto& d : nested) {
    d.message = "tests directory entry is not a regular file, not run as a test";
    layout.load_notes.push_back(std::move(d));
  }
  if (layout.test_files.empty()) {
    throw GraderError(ErrorCode::EmptyTestsDir, "no test files in " + layout.tests_dir.string(),
                      layout.tests_dir.string());
  }

  const auto answers = list_regular_files(tests_root);
  if (!answers.empty()) {
    layout.reference_answer = answers.front();
    for (std::size_t i = 1; i < answers.size(); ++i) {
      layout.load_notes.push_back(
          warning("several reference answer candidates; using " +
                      answers.front().filename().string(),
                  answers[i].string()));
    }
  }
  return layout;
}

Diagnostics validate_layout(const QuestionLayout& layout) {
  Diagnostics out = layout.load_notes;
  if (layout.info.grading_method != GradingMethod::External) {
    out.push_back(error("grading_method must be External, found '" +
                            layout.info.grading_method_text + "'",
                        (layout.root / "info.json").string()));
  }
  if (!is_valid_uuid(layout.info.uuid)) {
    out.push_back(error("uuid is not a UUID", (layout.root / "info.json").string()));
  }
  if (layout.info.timeout_s < 1) {
    out.push_back(error("timeout must be at least 1 second", (layout.root / "info.json").string()));
  }
  if (!layout.reference_answer) {
    out.push_back(warning("no reference answer file under tests/", (layout.root / "tests").string()));
  }
  if (layout.test_files.empty()) {
    out.push_back(error("no test files", layout.tests_dir.string()));
  }
  return out;
}

}  // namespace autograder
