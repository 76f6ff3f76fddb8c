#include "ldpjudge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "ldpjudge/error.hpp"

namespace ldpjudge {

namespace {

std::optional<double> ratio(std::int64_t num, std::int64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

double snap10(double value) { return std::round(value * 1e10) / 1e10; }

}  // namespace

ScoreSet compute_scores(const TagCounts& counts) {
  if (counts.n_correct < 0 || counts.n_incorrect < 0 || counts.n_irrelevant < 0 ||
      counts.n_missing < 0) {
    throw Error(ErrorCode::kInvalidArgument, "tag counts must be non-negative");
  }
  const auto c = counts.n_correct;
  ScoreSet s;
  s.correctness = ratio(c, c + counts.n_incorrect);
  s.precision = ratio(c, c + counts.n_irrelevant);
  s.recall = ratio(c, c + counts.n_missing);
  if (s.precision && s.recall) {
    const double sum = *s.precision + *s.recall;
    s.f1 = sum == 0.0 ? 0.0 : 2.0 * *s.precision * *s.recall / sum;
  }
  return s;
}

QuarterScore QuarterScore::from_quarters(int quarters) {
  if (quarters < 0 || quarters > 4) {
    throw Error(ErrorCode::kInvalidArgument,
                "quarter count out of range: " + std::to_string(quarters));
  }
  return QuarterScore(quarters);
}

QuarterScore QuarterScore::from_value(double value) {
  const double scaled = value * 4.0;
  const double nearest = std::round(scaled);
  if (!std::isfinite(value) || std::abs(scaled - nearest) > 4e-10 || nearest < 0 ||
      nearest > 4) {
    throw Error(ErrorCode::kInvalidArgument,
                "not a quarter point: " + std::to_string(value));
  }
  return QuarterScore(static_cast<int>(nearest));
}

QuarterScore bucket(double score) {
  if (!(score >= 0.0 && score <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "score outside [0,1]: " + std::to_string(score));
  }
  const double snapped = snap10(score) * 4.0;
  return QuarterScore::from_quarters(static_cast<int>(std::floor(snap10(snapped))));
}

double bucketed_accuracy(std::span<const double> predicted, std::span<const QuarterScore> human) {
  if (predicted.size() != human.size()) {
    throw Error(ErrorCode::kInvalidArgument, "length mismatch",
                {{"predicted", predicted.size()}, {"human", human.size()}});
  }
  if (predicted.empty()) throw Error(ErrorCode::kInsufficientData, "empty score lists");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (bucket(predicted[i]) == human[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

QuarterScore convert_grade(int grade) {
  if (grade < 1 || grade > 5) {
    throw Error(ErrorCode::kInvalidArgument, "grade outside 1..5: " + std::to_string(grade));
  }
  return QuarterScore::from_quarters(grade - 1);
}

// Continued fraction for the incomplete beta function (modified Lentz).
static double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 500;
  constexpr double kEpsilon = 1e-15;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEpsilon) return h;
  }
  return h;
}

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw Error(ErrorCode::kInvalidArgument, "beta parameters must be > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "x outside [0,1]");
  if (x == 0.0 || x == 1.0) return x;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  // The fraction converges fastest for x < (a+1)/(a+b+2); use symmetry otherwise.
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_tailed(double t, double df) {
  if (!(df > 0.0)) throw Error(ErrorCode::kInvalidArgument, "degrees of freedom must be > 0");
  if (std::isinf(t)) return 0.0;
  const double x = df / (df + t * t);
  return regularized_incomplete_beta(df / 2.0, 0.5, x);
}

CorrelationResult pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kInvalidArgument, "length mismatch",
                {{"x", x.size()}, {"y", y.size()}});
  }
  const std::size_t n = x.size();
  if (n < 3) {
    throw Error(ErrorCode::kInsufficientData, "pearson needs at least 3 samples", {{"n", n}});
  }
  auto constant = [](std::span<const double> v) {
    for (double value : v) {
      if (value != v.front()) return false;
    }
    return true;
  };
  if (constant(x) || constant(y)) {
    throw Error(ErrorCode::kUndefinedCorrelation, "correlation undefined for constant input");
  }

  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_x += x[i];
    mean_y += y[i];
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);

  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mean_x;
    const double dy = y[i] - mean_y;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  double r = sxy / std::sqrt(sxx * syy);
  r = std::clamp(r, -1.0, 1.0);

  CorrelationResult out;
  out.r = r;
  out.n = n;
  const double df = static_cast<double>(n - 2);
  const double one_minus_r2 = 1.0 - r * r;
  if (one_minus_r2 <= 0.0) {
    out.p_value = 0.0;
  } else {
    const double t = r * std::sqrt(df / one_minus_r2);
    out.p_value = std::clamp(student_t_two_tailed(t, df), 0.0, 1.0);
  }
  return out;
}

double round_decimal(double value, int places) {
  if (places < 0 || places > 10) throw Error(ErrorCode::kInvalidArgument, "places outside 0..10");
  // Work in integer units of 1e-10 so the half-way test is exact.
  const auto scaled = static_cast<std::int64_t>(std::llround(value * 1e10));
  std::int64_t unit = 1;
  for (int i = 0; i < 10 - places; ++i) unit *= 10;
  const std::int64_t half = unit / 2;
  const std::int64_t magnitude = scaled < 0 ? -scaled : scaled;
  std::int64_t rounded = (magnitude + (unit > 1 ? half : 0)) / unit;
  if (scaled < 0) rounded = -rounded;
  double divisor = 1.0;
  for (int i = 0; i < places; ++i) divisor *= 10.0;
  return static_cast<double>(rounded) / divisor;
}

}  // namespace ldpjudge
