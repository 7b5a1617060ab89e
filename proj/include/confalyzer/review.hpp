#pragma once

#include "confalyzer/finding.hpp"
#include "confalyzer/records.hpp"
#include "confalyzer/reliability.hpp"
#include "confalyzer/store.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace confalyzer {

class ReviewError : public Error {
 public:
  enum class Kind { UnknownFinding, UnknownReviewer, Unassigned };

  ReviewError(Kind kind, const std::string& message) : Error(message), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

// Findings with a minor or major issue, in input order.
std::vector<Finding> select_reviewable(std::span<const Finding> findings);

/// Gives every finding k distinct reviewers. The findings are shuffled with
/// the seed and reviewer slots are then dealt round-robin, so loads differ by
/// at most one. Throws InvalidArgument for even or zero k, duplicate
/// reviewer ids, or fewer reviewers than k.
std::vector<Assignment> assign(std::span<const Finding> reviewable, std::span<const Reviewer> reviewers, int k,
                               std::uint64_t seed, const std::string& run_id);

/// Appends a judgment after checking it against the stored assignments.
/// Throws ReviewError(UnknownFinding) when the key has no assignment and
/// ReviewError(Unassigned) when the reviewer is not one of its reviewers.
/// Returns the stored record (submitted_at filled in when empty).
Judgment record_judgment(Store& store, Judgment judgment);

// Latest judgment per (finding, reviewer), ordered by key then reviewer.
std::vector<Judgment> latest_judgments(std::span<const Judgment> history);

struct Verdict {
  FindingKey key;
  Severity severity = Severity::Minor;
  bool issue_plausible_majority = false;
  bool improvement_plausible_majority = false;
  bool full_agreement_issue = false;
  bool full_agreement_improvement = false;

  bool majority(Question q) const {
    return q == Question::Issue ? issue_plausible_majority : improvement_plausible_majority;
  }
  bool full_agreement(Question q) const {
    return q == Question::Issue ? full_agreement_issue : full_agreement_improvement;
  }
  bool operator==(const Verdict&) const = default;
};

struct VerdictSet {
  std::vector<Verdict> verdicts;        // assignment order
  std::vector<FindingKey> incomplete;   // findings missing at least one judgment
};

// Votes needed for a majority among k reviewers: ceil((k + 1) / 2).
int majority_threshold(int k);

VerdictSet verdicts(std::span<const Judgment> judgments, std::span<const Assignment> assignments);

struct PartitionSummary {
  std::size_t n = 0;
  std::size_t issue_plausible = 0;
  std::size_t improvement_plausible = 0;
  std::size_t issue_full_agreement = 0;
  std::size_t improvement_full_agreement = 0;

  // Exact ratios; throw InvalidArgument when n == 0.
  Rational issue_rate() const;
  Rational improvement_rate() const;
  Rational issue_full_agreement_rate() const;
  Rational improvement_full_agreement_rate() const;
};

struct AgreementSummary {
  PartitionSummary minor;
  PartitionSummary major;
  PartitionSummary all;
};

// Throws InvalidArgument("no verdicts") on empty input.
AgreementSummary agreement_summary(std::span<const Verdict> verdicts);

struct ReviewerProgress {
  std::string reviewer_id;
  std::size_t assigned = 0;
  std::size_t judged = 0;
};

std::vector<ReviewerProgress> review_progress(std::span<const Reviewer> reviewers,
                                              std::span<const Assignment> assignments,
                                              std::span<const Judgment> judgments);

}  // namespace confalyzer
