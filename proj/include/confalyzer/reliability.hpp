#pragma once

#include "confalyzer/records.hpp"

#include <boost/rational.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace confalyzer {

using Rational = boost::rational<std::int64_t>;

inline double to_double(const Rational& r) { return boost::rational_cast<double>(r); }

/// n items x K categories; counts[i][c] = raters who put item i in category c.
/// Every row sums to the same rater count r.
class RatingMatrix {
 public:
  // Throws InvalidArgument unless rows are non-empty, non-negative, of equal
  // width K >= 2 and equal sum r >= 2.
  explicit RatingMatrix(std::vector<std::vector<int>> counts);

  std::size_t items() const noexcept { return counts_.size(); }
  int raters() const noexcept { return raters_; }
  std::size_t categories() const noexcept { return counts_.front().size(); }
  const std::vector<std::vector<int>>& counts() const noexcept { return counts_; }
  const std::vector<int>& row(std::size_t i) const { return counts_.at(i); }

  bool operator==(const RatingMatrix&) const = default;

 private:
  std::vector<std::vector<int>> counts_;
  int raters_ = 0;
};

/// Binary matrix (column 0 = plausible, column 1 = implausible) for one
/// question over the assigned findings. Only the latest judgment per
/// (finding, reviewer) counts. Throws InvalidArgument naming the first
/// finding that lacks a judgment from one of its reviewers.
RatingMatrix from_judgments(std::span<const Judgment> judgments, std::span<const Assignment> assignments,
                            Question question);

// Mean fraction of agreeing rater pairs per item.
Rational observed_agreement(const RatingMatrix& m);

// Pooled category proportions p_c.
std::vector<Rational> category_proportions(const RatingMatrix& m);

Rational fleiss_expected_agreement(const RatingMatrix& m);
// nullopt when chance agreement is 1 (every rating in one category).
std::optional<Rational> fleiss_kappa(const RatingMatrix& m);

Rational gwet_expected_agreement(const RatingMatrix& m);
Rational gwet_ac1(const RatingMatrix& m);

/// Binary, three-rater matrix with round(prevalence * n) plausible majorities
/// and observed agreement as close to target_po as a whole number of split
/// items allows. Among the matrices meeting both, the one with the smallest
/// |kappa| is returned; the seed only permutes item order.
/// Throws InvalidArgument when the pair is not achievable.
RatingMatrix paradox_fixture(std::size_t n, double prevalence, double target_po, std::uint64_t seed);

}  // namespace confalyzer
