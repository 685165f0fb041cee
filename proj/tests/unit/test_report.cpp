#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "../support/oracles.hpp"
#include "../support/test_support.hpp"
#include "autograder/report.hpp"

using namespace autograder;
using namespace test_support;
using nlohmann::json;

namespace {

TestResult passed(const std::string& file) {
  return {file, Outcome::Passed, {{true, "call", "", std::nullopt}}, "", 0, false, "", {}};
}

TestResult failed(const std::string& file, const std::string& call, const std::string& diff) {
  return {file, Outcome::Failed, {{true, "ok", "", std::nullopt}, {false, call, diff, std::nullopt}}, "", 0, false, "",
          {}};
}

TestResult absent(const std::string& file, const std::string& reason, const std::string& stderr_text = "") {
  return {file, Outcome::Absent, {}, stderr_text, 0, false, reason, {}};
}

const std::vector<TestMetadata> kFibMetadata = {
    {"test_00_fib1.R", "Test F(1)", 2},
    {"test_01_fib2.R", "Test F(2)", 2},
    {"test_02_fibn.R", "Test F(n) for random n", 2},
};

}  // namespace

TEST_CASE("aggregate: a hardcoded submission earns two of six points") {
  const std::vector<TestResult> results = {
      passed("test_00_fib1.R"),
      failed("test_01_fib2.R", "fib(2)", "@@ -1,2 +1,1 @@\n 1\n-1"),
      failed("test_02_fibn.R", "fib(n)", "@@ -2,4 +2,4 @@\n 1\n-2\n-3\n-5\n+1\n+1\n+1"),
  };
  const auto report = aggregate(results, kFibMetadata);
  CHECK(report.succeeded);
  CHECK(report.score == 2.0 / 6.0);
  REQUIRE(report.tests.size() == 3);
  CHECK(report.tests[0] == GradedTest{"Test F(1)", 2, 2, ""});
  CHECK(report.tests[1] == GradedTest{"Test F(2)", 2, 0, "fib(2)\n@@ -1,2 +1,1 @@\n 1\n-1"});
  CHECK(report.tests[2].points == 0);
  CHECK(report.tests[2].output.find("-5\n+1") != std::string::npos);
}

TEST_CASE("aggregate: all tests passing scores one") {
  const std::vector<TestResult> results = {passed("test_00_fib1.R"), passed("test_01_fib2.R"),
                                           passed("test_02_fibn.R")};
  const auto report = aggregate(results, kFibMetadata);
  CHECK(report.score == 1.0);
  for (const auto& t : report.tests) CHECK(t.output.empty());
  CHECK(serialize_report(report).find("\"score\":1,") != std::string::npos);
}

TEST_CASE("aggregate: unmatched rows on either side") {
  const std::vector<TestResult> results = {passed("test_00_fib1.R"), passed("extra.R")};
  Diagnostics notes;
  const auto report = aggregate(results, kFibMetadata, &notes);
  REQUIRE(report.tests.size() == 4);
  CHECK(report.tests[0] == GradedTest{"extra.R", 1, 1, ""});
  CHECK(report.tests[1].points == 2);
  CHECK(report.tests[2].points == 0);
  CHECK(report.tests[2].output == "test did not complete: no result was recorded for this test");
  CHECK(report.score == 3.0 / 7.0);
  CHECK(notes.size() == 1);
}

TEST_CASE("aggregate: absent feedback carries the reason and the stderr tail") {
  std::string err;
  for (int i = 1; i <= 30; ++i) err += "line " + std::to_string(i) + "\n";
  const std::vector<TestResult> results = {absent("test_00_fib1.R", "timed out after 5 s", err)};
  const auto report = aggregate(results, std::span(kFibMetadata).first(1));
  const std::string& out = report.tests.at(0).output;
  CHECK(out.starts_with("test did not complete: timed out after 5 s\nline 11\n"));
  CHECK(out.ends_with("line 30"));
  CHECK(report.score == 0.0);
}

TEST_CASE("aggregate: zero total points is NoPointsDefined") {
  const std::vector<TestMetadata> zero = {{"a", "A", 0}};
  const std::vector<TestResult> results = {passed("a")};
  CHECK(error_code_of([&] { aggregate(results, zero); }) == ErrorCode::NoPointsDefined);
  CHECK(error_code_of([&] { aggregate(std::span<const TestResult>{}, std::span<const TestMetadata>{}); }) ==
        ErrorCode::NoPointsDefined);
}

TEST_CASE("aggregate agrees with a naive outer join") {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> coin(0, 1), count(0, 8), pts(0, 4);
  for (int iter = 0; iter < 1000; ++iter) {
    std::vector<std::pair<std::string, double>> meta_pairs;
    std::vector<std::pair<std::string, bool>> result_pairs;
    std::vector<TestMetadata> metadata;
    std::vector<TestResult> results;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      const std::string file = "t" + std::to_string(i);
      const bool has_meta = coin(rng) == 1, has_result = coin(rng) == 1;
      if (has_meta) {
        const double p = pts(rng) * 0.5;
        meta_pairs.emplace_back(file, p);
        metadata.push_back({file, file, p});
      }
      if (has_result) {
        const bool ok = coin(rng) == 1;
        result_pairs.emplace_back(file, ok);
        results.push_back(ok ? passed(file) : absent(file, "exited with status 1"));
      }
    }
    const auto rows = oracles::naive_join(meta_pairs, result_pairs, 1.0);
    double total = 0, earned = 0;
    for (const auto& r : rows) {
      total += r.max_points;
      earned += r.points;
    }
    if (!(total > 0)) {
      CHECK(error_code_of([&] { aggregate(results, metadata); }) == ErrorCode::NoPointsDefined);
      continue;
    }
    const auto report = aggregate(results, metadata);
    REQUIRE(report.tests.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(report.tests[i].name == rows[i].file);
      CHECK(report.tests[i].max_points == rows[i].max_points);
      CHECK(report.tests[i].points == rows[i].points);
      CHECK(report.tests[i].output.empty() == !rows[i].has_output);
    }
    CHECK(report.score == doctest::Approx(earned / total).epsilon(1e-12));
    CHECK(report.score >= 0.0);
    CHECK(report.score <= 1.0);
  }
}

TEST_CASE("catastrophic_report serializes to the exact fallback bytes") {
  CHECK(serialize_report(catastrophic_report()) ==
        "{\"succeeded\": false, \"score\": 0.0, \"message\": \"Catastrophic failure! Contact course staff and have "
        "them check the logs for this submission.\"}\n");
  const auto custom = serialize_report(catastrophic_report("No points are defined for this question."));
  CHECK(json::parse(custom)["message"] == "No points are defined for this question.");
}

TEST_CASE("error_to_report: one Error row holding the message") {
  const auto report = error_to_report("MalformedScore: @score 'x'", 100);
  CHECK_FALSE(report.succeeded);
  REQUIRE(report.tests.size() == 1);
  CHECK(report.tests[0] == GradedTest{"Error", 100, 0, "MalformedScore: @score 'x'"});
  const auto doc = json::parse(serialize_report(report));
  CHECK(doc["succeeded"] == false);
  CHECK(doc["score"] == 0);
  CHECK(doc["tests"][0]["max_points"] == 100);
  CHECK_FALSE(doc.contains("message"));
}

TEST_CASE("serialize_report: shape and round trip") {
  GradingReport report;
  report.tests = {{"Test F(1)", 2, 2, ""}, {"Test \"quoted\"\n", 0.5, 0, "diff \xff bytes"}};
  report.score = 0.8;
  report.succeeded = true;
  const std::string text = serialize_report(report);
  CHECK(text.ends_with("}\n"));
  CHECK(text.starts_with("{\"tests\":[{\"name\":\"Test F(1)\",\"max_points\":2,\"points\":2,\"output\":\"\"}"));
  const auto doc = nlohmann::ordered_json::parse(text);
  CHECK(doc.size() == 3);
  CHECK(doc["score"] == 0.8);
  CHECK(doc["succeeded"] == true);
  CHECK(doc["tests"][1]["name"] == "Test \"quoted\"\n");
  CHECK(doc["tests"][1]["max_points"] == 0.5);
  for (const auto& t : doc["tests"]) {
    std::vector<std::string> keys;
    for (const auto& [k, v] : t.items()) keys.push_back(k);
    CHECK(keys == std::vector<std::string>{"name", "max_points", "points", "output"});
  }
}

TEST_CASE("emit_results writes atomically and reports failure") {
  TempDir tmp;
  const auto path = tmp / "results.json";
  write_text(path, "old");
  emit_results(catastrophic_report(), path);
  CHECK(read_text(path) == serialize_report(catastrophic_report()));
  CHECK(mode_of(path) == 0644);
  // No temporary files are left behind.
  CHECK(std::distance(fs::directory_iterator(tmp.path()), fs::directory_iterator{}) == 1);

  CHECK(error_code_of([&] { emit_results(catastrophic_report(), tmp / "missing" / "results.json"); }) ==
        ErrorCode::WriteFailure);
}
