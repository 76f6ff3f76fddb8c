#pragma once

#include <cstddef>
#include <span>

#include "ldpjudge/domain.hpp"

namespace ldpjudge {

/// Correctness C/(C+I), precision C/(C+R), recall C/(C+M) and their harmonic
/// mean. A zero denominator leaves the score absent; f1 is absent whenever
/// precision or recall is, and 0 when both are present and sum to zero.
ScoreSet compute_scores(const TagCounts& counts);

/// One of the five quarter points 0, 0.25, 0.5, 0.75, 1. Stored as a count of
/// quarters so equality is exact.
class QuarterScore {
 public:
  constexpr QuarterScore() = default;

  /// Throws Error(kInvalidArgument) unless `value` is (within 1e-10) a quarter point.
  static QuarterScore from_value(double value);
  static QuarterScore from_quarters(int quarters);

  constexpr int quarters() const { return quarters_; }
  constexpr double value() const { return quarters_ / 4.0; }

  friend constexpr bool operator==(QuarterScore, QuarterScore) = default;
  friend constexpr auto operator<=>(QuarterScore, QuarterScore) = default;

 private:
  explicit constexpr QuarterScore(int quarters) : quarters_(quarters) {}
  int quarters_ = 0;
};

/// Largest quarter point <= score. The score is first rounded to 10 decimal
/// places so values like 0.7499999999999 land on 0.75.
QuarterScore bucket(double score);

/// Fraction of positions where bucket(predicted[i]) == human[i].
double bucketed_accuracy(std::span<const double> predicted, std::span<const QuarterScore> human);

/// 1 -> 0, 2 -> 0.25, ..., 5 -> 1.
QuarterScore convert_grade(int grade);

struct CorrelationResult {
  double r = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

/// Sample Pearson correlation with a two-tailed p-value from Student's t with
/// n-2 degrees of freedom. Requires n >= 3 and non-constant inputs.
CorrelationResult pearson(std::span<const double> x, std::span<const double> y);

/// Regularized incomplete beta I_x(a, b), evaluated by continued fraction.
double regularized_incomplete_beta(double a, double b, double x);

/// Two-tailed p-value P(|T| >= |t|) for Student's t with `df` degrees of freedom.
double student_t_two_tailed(double t, double df);

/// Rounds to `places` decimals, half away from zero, after first snapping to
/// 10 decimals to remove binary representation noise (5.445 -> 5.45).
double round_decimal(double value, int places);

}  // namespace ldpjudge
