#include "roma/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "roma/error.hpp"

namespace roma::stats {
namespace {

constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 100000;

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

// Series representation of P(a, x), valid for x < a + 1.
double gamma_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < kMaxIter; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - log_gamma(a));
}

// Continued fraction for Q(a, x), valid for x >= a + 1.
double gamma_continued_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - log_gamma(a)) * h;
}

double beta_continued_fraction(double a, double b, double x) {
  double qab = a + b;
  double qap = a + 1.0;
  double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m < kMaxIter; ++m) {
    int m2 = 2 * m;
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
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

void require_groups(const GroupedSamples& groups, std::size_t min_per_group) {
  if (groups.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "at least two groups are required");
  }
  for (const auto& [label, values] : groups) {
    if (values.size() < min_per_group) {
      throw Error(ErrorCode::kInvalidArgument,
                  "group '" + label + "' needs at least " + std::to_string(min_per_group) +
                      " values");
    }
  }
}

}  // namespace

double log_gamma(double x) {
  // Lanczos approximation (g = 7, n = 9); reflection for x < 0.5.
  static constexpr double kCoef[] = {
      0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
      771.32342877765313,   -176.61502916214059,   12.507343278686905,
      -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  if (x < 0.5) {
    return std::log(M_PI / std::abs(std::sin(M_PI * x))) - log_gamma(1.0 - x);
  }
  x -= 1.0;
  double a = kCoef[0];
  double t = x + 7.5;
  for (int i = 1; i < 9; ++i) a += kCoef[i] / (x + i);
  return 0.5 * std::log(2.0 * M_PI) + (x + 0.5) * std::log(t) - t + std::log(a);
}

double regularized_gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  if (x < a + 1.0) return clamp01(gamma_series(a, x));
  return clamp01(1.0 - gamma_continued_fraction(a, x));
}

double regularized_gamma_q(double a, double x) {
  if (x <= 0.0) return 1.0;
  if (x < a + 1.0) return clamp01(1.0 - gamma_series(a, x));
  return clamp01(gamma_continued_fraction(a, x));
}

double regularized_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double log_front = log_gamma(a + b) - log_gamma(a) - log_gamma(b) + a * std::log(x) +
                     b * std::log1p(-x);
  double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return clamp01(front * beta_continued_fraction(a, b, x) / a);
  }
  return clamp01(1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b);
}

double chi_squared_sf(double x, double df) {
  if (x <= 0.0) return 1.0;
  return regularized_gamma_q(df / 2.0, x / 2.0);
}

double f_sf(double x, double df1, double df2) {
  if (x <= 0.0) return 1.0;
  return regularized_beta(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * x));
}

double student_t_two_sided(double t, double df) {
  return regularized_beta(df / 2.0, 0.5, df / (df + t * t));
}

double mean(std::span<const double> v) {
  if (v.empty()) throw Error(ErrorCode::kInvalidArgument, "mean of empty sample");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double variance(std::span<const double> v) {
  if (v.size() < 2) throw Error(ErrorCode::kInvalidArgument, "variance needs two values");
  double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

TestResult one_way_anova(const GroupedSamples& groups) {
  require_groups(groups, 2);
  std::size_t n_total = 0;
  double grand_sum = 0.0;
  for (const auto& [_, values] : groups) {
    n_total += values.size();
    for (double x : values) grand_sum += x;
  }
  const double grand_mean = grand_sum / static_cast<double>(n_total);
  double ss_between = 0.0;
  double ss_within = 0.0;
  for (const auto& [_, values] : groups) {
    double m = mean(values);
    ss_between += static_cast<double>(values.size()) * (m - grand_mean) * (m - grand_mean);
    for (double x : values) ss_within += (x - m) * (x - m);
  }
  const double df1 = static_cast<double>(groups.size() - 1);
  const double df2 = static_cast<double>(n_total - groups.size());
  if (ss_within <= 0.0) {
    throw Error(ErrorCode::kDegenerateVariance, "within-group variance is zero");
  }
  TestResult r;
  r.kind = TestKind::kOneWayAnova;
  r.statistic = (ss_between / df1) / (ss_within / df2);
  r.df1 = df1;
  r.df2 = df2;
  r.p_value = f_sf(r.statistic, df1, df2);
  return r;
}

std::vector<double> rank_with_ties(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    double mid = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mid;
    i = j + 1;
  }
  return ranks;
}

TestResult kruskal_wallis(const GroupedSamples& groups) {
  require_groups(groups, 1);
  std::vector<double> pooled;
  for (const auto& [_, values] : groups) pooled.insert(pooled.end(), values.begin(), values.end());
  const double n = static_cast<double>(pooled.size());
  auto ranks = rank_with_ties(pooled);

  // Tie correction term: sum over tie groups of (t^3 - t).
  std::vector<double> sorted = pooled;
  std::sort(sorted.begin(), sorted.end());
  double tie_sum = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    double t = static_cast<double>(j - i);
    tie_sum += t * t * t - t;
    i = j;
  }
  const double correction = 1.0 - tie_sum / (n * n * n - n);
  if (correction <= 0.0) throw Error(ErrorCode::kAllTied, "all observations are tied");

  double sum_term = 0.0;
  std::size_t offset = 0;
  for (const auto& [_, values] : groups) {
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) rank_sum += ranks[offset + i];
    offset += values.size();
    sum_term += rank_sum * rank_sum / static_cast<double>(values.size());
  }
  TestResult r;
  r.kind = TestKind::kKruskalWallis;
  r.statistic = (12.0 / (n * (n + 1.0)) * sum_term - 3.0 * (n + 1.0)) / correction;
  if (r.statistic < 0.0 && r.statistic > -1e-12) r.statistic = 0.0;
  r.df1 = static_cast<double>(groups.size() - 1);
  r.p_value = chi_squared_sf(r.statistic, r.df1);
  return r;
}

TestResult chi_squared_independence(const std::vector<std::vector<double>>& table) {
  const std::size_t rows = table.size();
  if (rows < 2 || table[0].size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "contingency table must be at least 2 x 2");
  }
  const std::size_t cols = table[0].size();
  std::vector<double> row_sum(rows, 0.0);
  std::vector<double> col_sum(cols, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    if (table[i].size() != cols) {
      throw Error(ErrorCode::kInvalidArgument, "ragged contingency table");
    }
    for (std::size_t j = 0; j < cols; ++j) {
      if (table[i][j] < 0.0) throw Error(ErrorCode::kInvalidArgument, "negative count");
      row_sum[i] += table[i][j];
      col_sum[j] += table[i][j];
      total += table[i][j];
    }
  }
  double chi2 = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      double expected = row_sum[i] * col_sum[j] / total;
      if (!(expected > 0.0)) {
        throw Error(ErrorCode::kZeroExpectedCell,
                    "expected count is zero at (" + std::to_string(i) + ", " +
                        std::to_string(j) + ")");
      }
      double diff = table[i][j] - expected;
      chi2 += diff * diff / expected;
    }
  }
  TestResult r;
  r.kind = TestKind::kChiSquared;
  r.statistic = chi2;
  r.df1 = static_cast<double>((rows - 1) * (cols - 1));
  r.p_value = chi_squared_sf(chi2, r.df1);
  return r;
}

namespace {

double pooled_sd(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "both samples must be non-empty");
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  if (na + nb < 3.0) throw Error(ErrorCode::kZeroPooledSd, "pooled SD undefined");
  double ma = mean(a);
  double mb = mean(b);
  double ss = 0.0;
  for (double x : a) ss += (x - ma) * (x - ma);
  for (double x : b) ss += (x - mb) * (x - mb);
  return std::sqrt(ss / (na + nb - 2.0));
}

}  // namespace

TestResult student_t(std::span<const double> a, std::span<const double> b) {
  double sd = pooled_sd(a, b);
  if (!(sd > 0.0)) throw Error(ErrorCode::kZeroPooledSd, "pooled SD is zero");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  TestResult r;
  r.kind = TestKind::kStudentT;
  r.statistic = (mean(a) - mean(b)) / (sd * std::sqrt(1.0 / na + 1.0 / nb));
  r.df1 = na + nb - 2.0;
  r.p_value = student_t_two_sided(r.statistic, r.df1);
  return r;
}

double cohens_d(std::span<const double> a, std::span<const double> b) {
  double sd = pooled_sd(a, b);
  if (!(sd > 0.0)) throw Error(ErrorCode::kZeroPooledSd, "pooled SD is zero");
  return (mean(a) - mean(b)) / sd;
}

double cohens_d(std::span<const double> a, std::span<const double> b, double sd) {
  if (!(sd > 0.0)) throw Error(ErrorCode::kZeroPooledSd, "reference SD must be positive");
  return (mean(a) - mean(b)) / sd;
}

}  // namespace roma::stats
