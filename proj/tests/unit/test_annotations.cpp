#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include "../support/test_support.hpp"
#include "autograder/annotations.hpp"
#include "autograder/error.hpp"

using namespace autograder;
using namespace test_support;

namespace {

TestMetadata header(const std::string& text, Diagnostics* ds = nullptr, const std::string& leader = "#") {
  Diagnostics local;
  return parse_test_header(text, "test.R", leader, ds ? *ds : local);
}

}  // namespace

TEST_CASE("parse_annotation_line: accepted forms") {
  CHECK(parse_annotation_line("## @title Test F(1)") == Annotation{"title", "Test F(1)"});
  CHECK(parse_annotation_line("# @score 2") == Annotation{"score", "2"});
  CHECK(parse_annotation_line("#@score\t2.5  ") == Annotation{"score", "2.5"});
  CHECK(parse_annotation_line("###   @title  spaced   out ") == Annotation{"title", "spaced   out"});
  CHECK(parse_annotation_line("// @title C style", "//") == Annotation{"title", "C style"});
  CHECK(parse_annotation_line("## @title crlf\r") == Annotation{"title", "crlf"});
}

TEST_CASE("parse_annotation_line: rejected forms") {
  CHECK_FALSE(parse_annotation_line(""));
  CHECK_FALSE(parse_annotation_line("@title no leader"));
  CHECK_FALSE(parse_annotation_line("  ## @title indented"));
  CHECK_FALSE(parse_annotation_line("## @title"));
  CHECK_FALSE(parse_annotation_line("## @title   "));
  CHECK_FALSE(parse_annotation_line("## @ title"));
  CHECK_FALSE(parse_annotation_line("## title Test"));
  CHECK_FALSE(parse_annotation_line("## @title:Test"));
  CHECK_FALSE(parse_annotation_line("// @title x", "#"));
}

TEST_CASE("parse_test_header: the three Fibonacci tests") {
  const auto read = [](const char* name) {
    Diagnostics ds;
    const auto meta = parse_test_header(read_text(kFixtures / "fib" / "tests" / "tests" / name), name, "#", ds);
    CHECK(ds.empty());
    return meta;
  };
  const auto t1 = read("test_00_fib1.sh");
  const auto t2 = read("test_01_fib2.sh");
  const auto tn = read("test_02_fibn.sh");
  CHECK(t1 == TestMetadata{"test_00_fib1.sh", "Test F(1)", 2.0});
  CHECK(t2 == TestMetadata{"test_01_fib2.sh", "Test F(2)", 2.0});
  CHECK(tn == TestMetadata{"test_02_fibn.sh", "Test F(n) for random n", 2.0});
  CHECK(t1.max_points + t2.max_points + tn.max_points == 6.0);
}

TEST_CASE("parse_test_header: defaults without annotations") {
  const auto meta = header("fib_test <- 1\n");
  CHECK(meta.title == "test.R");
  CHECK(meta.max_points == 1.0);
  CHECK(header("").max_points == 1.0);
}

TEST_CASE("parse_test_header: duplicates keep the first and warn") {
  Diagnostics ds;
  const auto meta = header("## @score 2\n## @score 3\n## @title A\n## @title B\n", &ds);
  CHECK(meta.max_points == 2.0);
  CHECK(meta.title == "A");
  REQUIRE(ds.size() == 2);
  CHECK(ds[0].path == "test.R:2");
  CHECK(ds[1].path == "test.R:4");
  for (const auto& d : ds) CHECK(d.severity == Severity::Warning);
}

TEST_CASE("parse_test_header: annotations after code are ignored") {
  Diagnostics ds;
  const auto meta = header("#!/bin/sh\n\n## @title Header\nx=1\n## @score 9\n## @score nonsense\n", &ds);
  CHECK(meta.title == "Header");
  CHECK(meta.max_points == 1.0);
  CHECK(ds.size() == 2);
}

TEST_CASE("parse_test_header: unknown tags warn") {
  Diagnostics ds;
  const auto meta = header("## @author someone\n## @score 0.5\n", &ds);
  CHECK(meta.max_points == 0.5);
  REQUIRE(ds.size() == 1);
  CHECK(ds[0].message.find("author") != std::string::npos);
}

TEST_CASE("parse_test_header: malformed scores name the line") {
  for (const char* bad : {"## @score two\n", "## @score -1\n", "## @score 1e999\n", "## @score 2x\n",
                          "## @score nan\n"}) {
    try {
      header(std::string("## @title T\n") + bad);
      FAIL("expected MalformedScore for " << bad);
    } catch (const GraderError& e) {
      CHECK(e.code() == ErrorCode::MalformedScore);
      CHECK(e.subject() == "test.R:2");
    }
  }
  CHECK(header("## @score 0\n").max_points == 0.0);
}

TEST_CASE("extract_metadata: one entry per file in name order") {
  const auto set = extract_metadata(kFixtures / "fib" / "tests" / "tests");
  REQUIRE(set.tests.size() == 3);
  CHECK(set.tests[0].file == "test_00_fib1.sh");
  CHECK(set.tests[2].file == "test_02_fibn.sh");
  CHECK(set.diagnostics.empty());

  TempDir tmp;
  write_text(tmp / "b.sh", "## @score nope\n");
  CHECK(error_code_of([&] { extract_metadata(tmp.path()); }) == ErrorCode::MalformedScore);
  const std::vector<fs::path> missing{tmp / "absent.sh"};
  CHECK(error_code_of([&] { extract_metadata(missing); }) == ErrorCode::UnreadableFile);
  CHECK(error_code_of([&] { extract_metadata(tmp.path(), ""); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("parse_test_header agrees with a naive line scan on random headers") {
  // Each generated line is tagged with what a reader should make of it.
  struct Piece {
    std::string text;
    int kind;  // 0 neutral comment/blank, 1 title, 2 score, 3 code
    std::string value;
  };
  const std::vector<Piece> pool = {
      {"", 0, ""},
      {"# plain comment", 0, ""},
      {"## @note whatever", 0, ""},
      {"## @title Alpha", 1, "Alpha"},
      {"# @title  Beta gamma ", 1, "Beta gamma"},
      {"### @score 3", 2, "3"},
      {"#@score 0.25", 2, "0.25"},
      {"x <- 1", 3, ""},
      {"echo hi", 3, ""},
  };
  std::mt19937 rng(42);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::uniform_int_distribution<int> len(0, 12);
  for (int iter = 0; iter < 3000; ++iter) {
    std::string text;
    std::string title = "test.R";
    double score = 1.0;
    bool seen_title = false, seen_score = false, code = false;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) {
      const Piece& p = pool[pick(rng)];
      text += p.text + "\n";
      if (p.kind == 3) code = true;
      if (code) continue;
      if (p.kind == 1 && !seen_title) {
        title = p.value;
        seen_title = true;
      }
      if (p.kind == 2 && !seen_score) {
        score = std::stod(p.value);
        seen_score = true;
      }
    }
    const auto meta = header(text);
    CHECK(meta.title == title);
    CHECK(meta.max_points == score);
  }
}
