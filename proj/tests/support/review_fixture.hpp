#pragma once

#include "confalyzer/review.hpp"

#include <map>
#include <string>
#include <vector>

namespace testing {

// Target shape of a complete 3-reviewer judgment set.
struct ReviewShape {
  int minor = 73;
  int major = 75;
  int issue_minor = 64;  // plausible issue majorities among minor findings
  int issue_major = 67;
  int improvement_minor = 71;
  int improvement_major = 74;
  int issue_unanimous = 80;  // findings where all three agree on the issue question
  int improvement_unanimous = 113;
};

struct ReviewFixture {
  std::vector<confalyzer::Reviewer> reviewers;
  std::vector<confalyzer::Finding> findings;  // minor first, then major
  std::vector<confalyzer::Assignment> assignments;
  std::vector<confalyzer::Judgment> judgments;
};

inline std::vector<confalyzer::Reviewer> six_reviewers() {
  std::vector<confalyzer::Reviewer> out;
  for (int i = 1; i <= 6; ++i) out.push_back({"r" + std::to_string(i), "Reviewer " + std::to_string(i)});
  return out;
}

inline ReviewFixture build_review_fixture(const ReviewShape& shape, const std::string& run_id = "run-fixture") {
  using namespace confalyzer;
  ReviewFixture fx;
  fx.reviewers = six_reviewers();
  const auto ids = builtin_catalog().ids();
  const int n = shape.minor + shape.major;
  for (int i = 0; i < n; ++i) {
    Finding f;
    f.sample_id = 1 + i / 18;
    f.criterion_id = ids[static_cast<std::size_t>(i % 18)];
    f.severity = i < shape.minor ? Severity::Minor : Severity::Major;
    f.issue_description = "issue " + std::to_string(i);
    f.improvement_suggestion = "improve " + std::to_string(i);
    f.latency_s = 1.0;
    f.created_at = "2026-01-01T00:00:00.000Z";
    fx.findings.push_back(f);
  }
  fx.assignments = assign(fx.findings, fx.reviewers, 3, 7, run_id);

  std::map<std::pair<int, std::string>, int> index;
  for (int i = 0; i < n; ++i) index[{fx.findings[i].sample_id, fx.findings[i].criterion_id.str()}] = i;

  auto votes = [](bool plausible, bool unanimous) { return plausible ? (unanimous ? 3 : 2) : (unanimous ? 0 : 1); };
  for (const auto& a : fx.assignments) {
    const int i = index.at({a.key.sample_id, a.key.criterion_id.str()});
    const bool minor = i < shape.minor;
    const int j = minor ? i : i - shape.minor;
    const bool issue = j < (minor ? shape.issue_minor : shape.issue_major);
    const bool improvement = j < (minor ? shape.improvement_minor : shape.improvement_major);
    const int issue_votes = votes(issue, i < shape.issue_unanimous);
    const int improvement_votes = votes(improvement, i < shape.improvement_unanimous);
    for (int r = 0; r < 3; ++r) {
      fx.judgments.push_back(
          Judgment{a.key, a.reviewer_ids[static_cast<std::size_t>(r)], r < issue_votes, r < improvement_votes,
                   "2026-01-02T00:00:00.000Z"});
    }
  }
  return fx;
}

}  // namespace testing
