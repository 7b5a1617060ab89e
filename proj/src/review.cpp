#include "confalyzer/review.hpp"

#include "confalyzer/util.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>

namespace confalyzer {

std::vector<Finding> select_reviewable(std::span<const Finding> findings) {
  std::vector<Finding> out;
  std::copy_if(findings.begin(), findings.end(), std::back_inserter(out),
               [](const Finding& f) { return f.severity != Severity::NoIssue; });
  return out;
}

std::vector<Assignment> assign(std::span<const Finding> reviewable, std::span<const Reviewer> reviewers, int k,
                               std::uint64_t seed, const std::string& run_id) {
  if (k <= 0 || k % 2 == 0) throw InvalidArgument("k must be odd, got " + std::to_string(k));
  std::set<std::string> ids;
  for (const auto& r : reviewers) {
    if (!ids.insert(r.id).second) throw InvalidArgument("duplicate reviewer id \"" + r.id + "\"");
  }
  if (reviewers.size() < static_cast<std::size_t>(k)) {
    throw InvalidArgument("too few reviewers: need " + std::to_string(k) + ", have " +
                          std::to_string(reviewers.size()));
  }

  std::vector<std::size_t> order(reviewable.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  // Explicit Fisher-Yates so the result does not depend on the standard library.
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }

  const std::string now = utc_now_iso8601();
  const std::size_t r = reviewers.size();
  std::vector<Assignment> out;
  out.reserve(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Finding& f = reviewable[order[i]];
    Assignment a;
    a.key = FindingKey{run_id, f.sample_id, f.criterion_id};
    a.severity = f.severity;
    for (int j = 0; j < k; ++j) a.reviewer_ids.push_back(reviewers[(i * k + j) % r].id);
    a.created_at = now;
    out.push_back(std::move(a));
  }
  return out;
}

Judgment record_judgment(Store& store, Judgment judgment) {
  const auto assignments = store.load_assignments(judgment.key.run_id).records;
  auto it = std::find_if(assignments.begin(), assignments.end(),
                         [&](const Assignment& a) { return a.key == judgment.key; });
  if (it == assignments.end()) {
    throw ReviewError(ReviewError::Kind::UnknownFinding, "unknown finding " + judgment.key.str());
  }
  if (std::find(it->reviewer_ids.begin(), it->reviewer_ids.end(), judgment.reviewer_id) == it->reviewer_ids.end()) {
    throw ReviewError(ReviewError::Kind::Unassigned,
                      "reviewer " + judgment.reviewer_id + " is not assigned to finding " + judgment.key.str());
  }
  if (judgment.submitted_at.empty()) judgment.submitted_at = utc_now_iso8601();
  store.append_judgment(judgment);
  return judgment;
}

std::vector<Judgment> latest_judgments(std::span<const Judgment> history) {
  std::map<std::pair<FindingKey, std::string>, Judgment> latest;
  for (const auto& j : history) latest.insert_or_assign({j.key, j.reviewer_id}, j);
  std::vector<Judgment> out;
  out.reserve(latest.size());
  for (auto& [key, j] : latest) out.push_back(std::move(j));
  return out;
}

int majority_threshold(int k) { return (k + 2) / 2; }

VerdictSet verdicts(std::span<const Judgment> judgments, std::span<const Assignment> assignments) {
  std::map<std::pair<FindingKey, std::string>, const Judgment*> latest;
  for (const auto& j : judgments) latest[{j.key, j.reviewer_id}] = &j;

  VerdictSet out;
  for (const auto& a : assignments) {
    int issue_true = 0;
    int improvement_true = 0;
    bool complete = true;
    for (const auto& rid : a.reviewer_ids) {
      auto it = latest.find({a.key, rid});
      if (it == latest.end()) {
        complete = false;
        break;
      }
      issue_true += it->second->issue_plausible ? 1 : 0;
      improvement_true += it->second->improvement_plausible ? 1 : 0;
    }
    if (!complete) {
      out.incomplete.push_back(a.key);
      continue;
    }
    const int k = static_cast<int>(a.reviewer_ids.size());
    const int need = majority_threshold(k);
    Verdict v;
    v.key = a.key;
    v.severity = a.severity;
    v.issue_plausible_majority = issue_true >= need;
    v.improvement_plausible_majority = improvement_true >= need;
    v.full_agreement_issue = issue_true == 0 || issue_true == k;
    v.full_agreement_improvement = improvement_true == 0 || improvement_true == k;
    out.verdicts.push_back(std::move(v));
  }
  return out;
}

namespace {

Rational ratio(std::size_t num, std::size_t den) {
  if (den == 0) throw InvalidArgument("empty partition");
  return Rational(static_cast<std::int64_t>(num), static_cast<std::int64_t>(den));
}

void tally(PartitionSummary& p, const Verdict& v) {
  ++p.n;
  p.issue_plausible += v.issue_plausible_majority ? 1 : 0;
  p.improvement_plausible += v.improvement_plausible_majority ? 1 : 0;
  p.issue_full_agreement += v.full_agreement_issue ? 1 : 0;
  p.improvement_full_agreement += v.full_agreement_improvement ? 1 : 0;
}

}  // namespace

Rational PartitionSummary::issue_rate() const { return ratio(issue_plausible, n); }
Rational PartitionSummary::improvement_rate() const { return ratio(improvement_plausible, n); }
Rational PartitionSummary::issue_full_agreement_rate() const { return ratio(issue_full_agreement, n); }
Rational PartitionSummary::improvement_full_agreement_rate() const { return ratio(improvement_full_agreement, n); }

AgreementSummary agreement_summary(std::span<const Verdict> verdicts) {
  if (verdicts.empty()) throw InvalidArgument("no verdicts");
  AgreementSummary s;
  for (const auto& v : verdicts) {
    tally(v.severity == Severity::Major ? s.major : s.minor, v);
    tally(s.all, v);
  }
  return s;
}

std::vector<ReviewerProgress> review_progress(std::span<const Reviewer> reviewers,
                                              std::span<const Assignment> assignments,
                                              std::span<const Judgment> judgments) {
  std::set<std::pair<FindingKey, std::string>> judged;
  for (const auto& j : judgments) judged.insert({j.key, j.reviewer_id});
  std::vector<ReviewerProgress> out;
  for (const auto& r : reviewers) {
    ReviewerProgress p{r.id, 0, 0};
    for (const auto& a : assignments) {
      if (std::find(a.reviewer_ids.begin(), a.reviewer_ids.end(), r.id) == a.reviewer_ids.end()) continue;
      ++p.assigned;
      if (judged.count({a.key, r.id})) ++p.judged;
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace confalyzer
