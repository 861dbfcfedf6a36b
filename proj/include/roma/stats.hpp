#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace roma::stats {

// Ordered (label, values) groups.
using GroupedSamples = std::vector<std::pair<std::string, std::vector<double>>>;

enum class TestKind { kOneWayAnova, kKruskalWallis, kChiSquared, kStudentT };

struct TestResult {
  TestKind kind = TestKind::kOneWayAnova;
  double statistic = 0.0;
  double df1 = 0.0;
  double df2 = 0.0;  // only for F tests
  double p_value = 1.0;
};

// Regularized incomplete functions and the tail probabilities built on them.
// Continued fractions are evaluated with the modified Lentz method.
double log_gamma(double x);
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);
double regularized_beta(double a, double b, double x);

double chi_squared_sf(double x, double df);
double f_sf(double x, double df1, double df2);
// Two-sided p for Student's t.
double student_t_two_sided(double t, double df);

// F = MSB / MSW with p from F(k-1, N-k). Throws Error(kDegenerateVariance)
// when the within-group sum of squares is 0 and Error(kInvalidArgument) when
// there are fewer than two groups or any group has fewer than two values.
TestResult one_way_anova(const GroupedSamples& groups);

// Rank-based H with tie correction, p from chi-squared(k-1).
// Throws Error(kAllTied) when every observation shares one value.
TestResult kruskal_wallis(const GroupedSamples& groups);

// Pearson chi-squared on an r x c count table, df = (r-1)(c-1).
// Throws Error(kZeroExpectedCell).
TestResult chi_squared_independence(const std::vector<std::vector<double>>& table);

// Pooled-variance two-sample t test.
TestResult student_t(std::span<const double> a, std::span<const double> b);

// (mean_a - mean_b) / pooled_sd. Throws Error(kZeroPooledSd).
double cohens_d(std::span<const double> a, std::span<const double> b);
// Standardized difference against an externally estimated SD (for example a
// model residual SD). Throws Error(kZeroPooledSd) when sd <= 0.
double cohens_d(std::span<const double> a, std::span<const double> b, double sd);

double mean(std::span<const double> v);
// Sample variance (n - 1 denominator).
double variance(std::span<const double> v);

// Mid-ranks (1-based) of the values, ties share their average rank.
std::vector<double> rank_with_ties(std::span<const double> values);

}  // namespace roma::stats
