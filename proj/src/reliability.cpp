#include "confalyzer/reliability.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

namespace confalyzer {

RatingMatrix::RatingMatrix(std::vector<std::vector<int>> counts) : counts_(std::move(counts)) {
  if (counts_.empty()) throw InvalidArgument("rating matrix has no items");
  const std::size_t k = counts_.front().size();
  if (k < 2) throw InvalidArgument("rating matrix needs at least 2 categories");
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    const auto& row = counts_[i];
    if (row.size() != k) throw InvalidArgument("row " + std::to_string(i) + " has wrong width");
    int sum = 0;
    for (int v : row) {
      if (v < 0) throw InvalidArgument("row " + std::to_string(i) + " has a negative count");
      sum += v;
    }
    if (i == 0) raters_ = sum;
    if (sum != raters_) throw InvalidArgument("unequal rater counts at row " + std::to_string(i));
  }
  if (raters_ < 2) throw InvalidArgument("rating matrix needs at least 2 raters");
}

RatingMatrix from_judgments(std::span<const Judgment> judgments, std::span<const Assignment> assignments,
                            Question question) {
  std::map<std::pair<FindingKey, std::string>, bool> latest;
  for (const auto& j : judgments) latest[{j.key, j.reviewer_id}] = j.answer(question);

  std::vector<std::vector<int>> counts;
  for (const auto& a : assignments) {
    std::vector<int> row(2, 0);
    for (const auto& rid : a.reviewer_ids) {
      auto it = latest.find({a.key, rid});
      if (it == latest.end()) {
        throw InvalidArgument("finding " + a.key.str() + " is incomplete (no judgment from " + rid + ")");
      }
      ++row[it->second ? 0 : 1];
    }
    counts.push_back(std::move(row));
  }
  if (counts.empty()) throw InvalidArgument("no complete findings");
  return RatingMatrix(std::move(counts));
}

Rational observed_agreement(const RatingMatrix& m) {
  const std::int64_t r = m.raters();
  Rational sum = 0;
  for (const auto& row : m.counts()) {
    std::int64_t pairs = 0;
    for (int v : row) pairs += static_cast<std::int64_t>(v) * (v - 1);
    sum += Rational(pairs, r * (r - 1));
  }
  return sum / static_cast<std::int64_t>(m.items());
}

std::vector<Rational> category_proportions(const RatingMatrix& m) {
  const std::int64_t total = static_cast<std::int64_t>(m.items()) * m.raters();
  std::vector<Rational> p;
  for (std::size_t c = 0; c < m.categories(); ++c) {
    std::int64_t col = 0;
    for (const auto& row : m.counts()) col += row[c];
    p.emplace_back(col, total);
  }
  return p;
}

Rational fleiss_expected_agreement(const RatingMatrix& m) {
  Rational pe = 0;
  for (const auto& p : category_proportions(m)) pe += p * p;
  return pe;
}

std::optional<Rational> fleiss_kappa(const RatingMatrix& m) {
  const Rational pe = fleiss_expected_agreement(m);
  if (pe == Rational(1)) return std::nullopt;
  return (observed_agreement(m) - pe) / (Rational(1) - pe);
}

Rational gwet_expected_agreement(const RatingMatrix& m) {
  Rational sum = 0;
  for (const auto& p : category_proportions(m)) sum += p * (Rational(1) - p);
  return sum / static_cast<std::int64_t>(m.categories() - 1);
}

Rational gwet_ac1(const RatingMatrix& m) {
  const Rational pe = gwet_expected_agreement(m);
  return (observed_agreement(m) - pe) / (Rational(1) - pe);
}

RatingMatrix paradox_fixture(std::size_t n, double prevalence, double target_po, std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("paradox fixture needs at least one item");
  if (!(prevalence >= 0.0 && prevalence <= 1.0) || !(target_po >= 0.0 && target_po <= 1.0)) {
    throw InvalidArgument("prevalence and target agreement must lie in [0, 1]");
  }
  // With three raters an item is either unanimous (agreement 1) or split 2:1
  // (agreement 1/3), so P_o = 1 - 2s/(3n) for s split items.
  const auto majority = static_cast<std::int64_t>(std::llround(prevalence * static_cast<double>(n)));
  const auto split = static_cast<std::int64_t>(std::llround(1.5 * static_cast<double>(n) * (1.0 - target_po)));
  const auto total = static_cast<std::int64_t>(n);
  if (split > total) throw InvalidArgument("infeasible targets: agreement too low for three raters");

  std::optional<std::vector<std::int64_t>> best;  // {a, b, c, d}
  Rational best_kappa = 0;
  for (std::int64_t b = 0; b <= std::min(majority, split); ++b) {
    const std::int64_t c = split - b;
    const std::int64_t a = majority - b;
    const std::int64_t d = total - majority - c;
    if (c < 0 || d < 0) continue;
    std::vector<std::vector<int>> counts;
    counts.insert(counts.end(), a, {3, 0});
    counts.insert(counts.end(), b, {2, 1});
    counts.insert(counts.end(), c, {1, 2});
    counts.insert(counts.end(), d, {0, 3});
    const RatingMatrix m(std::move(counts));
    const auto kappa = fleiss_kappa(m);
    const Rational k = kappa ? *kappa : Rational(0);
    const Rational abs_k = k < Rational(0) ? -k : k;
    if (!best || abs_k < best_kappa) {
      best = std::vector<std::int64_t>{a, b, c, d};
      best_kappa = abs_k;
    }
  }
  if (!best) throw InvalidArgument("infeasible targets: no matrix meets prevalence and agreement");

  std::vector<std::vector<int>> counts;
  counts.insert(counts.end(), (*best)[0], {3, 0});
  counts.insert(counts.end(), (*best)[1], {2, 1});
  counts.insert(counts.end(), (*best)[2], {1, 2});
  counts.insert(counts.end(), (*best)[3], {0, 3});
  std::mt19937_64 rng(seed);
  std::shuffle(counts.begin(), counts.end(), rng);
  return RatingMatrix(std::move(counts));
}

}  // namespace confalyzer
