#include "confalyzer/finding.hpp"
#include "helpers.hpp"

using namespace confalyzer;

namespace {

RawResponse raw(std::string text) { return RawResponse{std::move(text), 2.5, 100, 20, "t"}; }

const CriterionId kC5 = CriterionId::parse("C5");

Finding parse(const std::string& text) { return parse_finding(raw(text), 4, kC5, "2026-01-01T00:00:00.000Z"); }

ParseError::Kind parse_error_kind(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e.kind();
  }
  FAIL("expected a parse error");
  return ParseError::Kind::Unparseable;
}

}  // namespace

TEST_CASE("severity labels") {
  CHECK(to_label(Severity::NoIssue) == "no issue");
  CHECK(to_label(Severity::Minor) == "minor issue");
  CHECK(to_label(Severity::Major) == "major issue");
  CHECK(parse_severity_label("Major Issue") == Severity::Major);
  CHECK(parse_severity_label("MINOR_ISSUE") == Severity::Minor);
  CHECK(parse_severity_label("no-issue") == Severity::NoIssue);
  CHECK(parse_severity_label("none") == Severity::NoIssue);
  CHECK(parse_severity_label("major") == Severity::Major);
  CHECK_FALSE(parse_severity_label("critical"));
  CHECK(Severity::NoIssue < Severity::Minor);
  CHECK(Severity::Minor < Severity::Major);
}

TEST_CASE("plain record") {
  const auto f = parse(R"({"severity": "major issue", "issue": "No comparison view.", "improvement": "Add one."})");
  CHECK(f.severity == Severity::Major);
  CHECK(f.issue_description == "No comparison view.");
  CHECK(f.improvement_suggestion == "Add one.");
  CHECK(f.sample_id == 4);
  CHECK(f.criterion_id == kC5);
  CHECK(f.latency_s == 2.5);
  CHECK(f.input_tokens == 100);
  CHECK(f.output_tokens == 20);
  CHECK(f.created_at == "2026-01-01T00:00:00.000Z");
}

TEST_CASE("record wrapped in prose and fences") {
  const auto f = parse("Sure, here you go:\n```json\n{\n  \"severity\": \"Minor\",\n  \"issue_description\": \"x {y}\",\n"
                       "  \"improvement_suggestion\": \"z\"\n}\n```\nThanks!");
  CHECK(f.severity == Severity::Minor);
  CHECK(f.issue_description == "x {y}");
  CHECK(f.improvement_suggestion == "z");
}

TEST_CASE("no issue with null or empty texts") {
  CHECK(parse(R"({"severity":"no issue","issue":null,"improvement":null})").severity == Severity::NoIssue);
  const auto f = parse(R"({"severity":"none","issue":"","improvement":"  "})");
  CHECK(f.severity == Severity::NoIssue);
  CHECK_FALSE(f.issue_description);
  CHECK_FALSE(f.improvement_suggestion);
}

TEST_CASE("malformed replies are classified") {
  CHECK(parse_error_kind("I could not watch the video.") == ParseError::Kind::Unparseable);
  CHECK(parse_error_kind("{\"severity\": ") == ParseError::Kind::Unparseable);
  CHECK(parse_error_kind(R"({"severity":"critical","issue":"a","improvement":"b"})") ==
        ParseError::Kind::UnknownSeverity);
  CHECK(parse_error_kind(R"({"severity":"major issue","improvement":"b"})") == ParseError::Kind::ContractViolation);
  CHECK(parse_error_kind(R"({"severity":"minor issue","issue":"a"})") == ParseError::Kind::ContractViolation);
  CHECK(parse_error_kind(R"({"severity":"no issue","issue":"a","improvement":"b"})") ==
        ParseError::Kind::ContractViolation);
}

TEST_CASE("parse errors keep the raw text") {
  try {
    parse("garbage");
    FAIL("expected error");
  } catch (const ParseError& e) {
    CHECK(e.raw() == "garbage");
    CHECK(to_string(e.kind()) == "unparseable");
  }
}

TEST_CASE("serialized records parse back") {
  Finding f;
  f.sample_id = 4;
  f.criterion_id = kC5;
  f.severity = Severity::Minor;
  f.issue_description = "quote \" and brace }";
  f.improvement_suggestion = "fix";
  const auto back = parse(serialize_record(f));
  CHECK(back.severity == f.severity);
  CHECK(back.issue_description == f.issue_description);
  CHECK(back.improvement_suggestion == f.improvement_suggestion);
}

TEST_CASE("store json round trip") {
  Finding f = parse(R"({"severity":"minor issue","issue":"a","improvement":"b"})");
  CHECK(finding_from_json(finding_to_json(f)) == f);
  Finding n = parse(R"({"severity":"no issue"})");
  CHECK(finding_from_json(finding_to_json(n)) == n);
}

TEST_CASE("segment merge") {
  Finding a = parse(R"({"severity":"no issue"})");
  a.created_at = "2026-01-01T00:00:01.000Z";
  Finding b = parse(R"({"severity":"minor issue","issue":"late issue","improvement":"late fix"})");
  Finding c = parse(R"({"severity":"major issue","issue":"big","improvement":"rework"})");

  SUBCASE("single segment is returned unchanged") {
    const Finding parts[] = {b};
    CHECK(merge_segment_findings(parts) == b);
  }
  SUBCASE("one flagged segment keeps its text unlabelled") {
    const Finding parts[] = {a, b};
    const auto m = merge_segment_findings(parts);
    CHECK(m.severity == Severity::Minor);
    CHECK(m.issue_description == "late issue");
    CHECK(m.latency_s == 5.0);
    CHECK(m.input_tokens == 200);
    CHECK(m.output_tokens == 40);
    CHECK(m.created_at == "2026-01-01T00:00:01.000Z");
    CHECK(m.raw_text.find("--- segment 2/2 ---") != std::string::npos);
    CHECK_NOTHROW(validate_finding(m));
  }
  SUBCASE("several flagged segments are labelled in order") {
    const Finding parts[] = {b, a, c};
    const auto m = merge_segment_findings(parts);
    CHECK(m.severity == Severity::Major);
    CHECK(m.issue_description == "[segment 1/3] late issue\n\n[segment 3/3] big");
    CHECK(m.improvement_suggestion == "[segment 1/3] late fix\n\n[segment 3/3] rework");
  }
  SUBCASE("all clean") {
    const Finding parts[] = {a, a};
    const auto m = merge_segment_findings(parts);
    CHECK(m.severity == Severity::NoIssue);
    CHECK_FALSE(m.issue_description);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(merge_segment_findings({}), InvalidArgument);
    Finding other = b;
    other.sample_id = 5;
    const Finding parts[] = {b, other};
    CHECK_THROWS_AS(merge_segment_findings(parts), InvalidArgument);
  }
}
