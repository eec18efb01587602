#pragma once

#include <chrono>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace stablecoin::stats {

using Date = std::chrono::sys_days;

struct Observation {
    Date date;
    double value = 0.0;
};

/// Point(1.0) or a band [lo, hi] such as FRAX's collateral-ratio range.
struct Target {
    double lo = 1.0;
    double hi = 1.0;

    static Target point(double value = 1.0) { return {value, value}; }
    static Target band(double lo, double hi);
    bool is_band() const { return lo != hi; }
};

struct PriceSeries {
    std::vector<Observation> observations;
    Target target;

    /// Throws InvalidArgument unless dates are strictly increasing.
    void validate() const;
    std::vector<double> values() const;
};

struct VSeries {
    std::vector<Observation> observations;

    void validate() const;
    std::vector<double> values() const;
};

// --- deviation metrics ------------------------------------------------------

struct DeviationReport {
    double deviation = 0.0;
    double downward_deviation = 0.0;
    std::size_t n = 0;
};

/// Per-observation squared distance to the target (0 inside a band).
std::vector<double> squared_deviations(const PriceSeries& series);
/// Per-observation squared shortfall below the target's lower edge.
std::vector<double> downward_squared_deviations(const PriceSeries& series);

/// RMS distance to the target. Throws EmptySeries.
double price_deviation(const PriceSeries& series);
/// RMS of shortfalls below the target. Throws EmptySeries.
double downward_deviation(const PriceSeries& series);
DeviationReport deviation_report(const PriceSeries& series);

/// Elementwise min(value, cap).
std::vector<double> downward_clip(std::span<const double> values, double cap = 1.0);
std::vector<Observation> downward_clip(std::span<const Observation> series, double cap = 1.0);

/// 1-based ranks, smallest value first; ties share the lower rank.
std::vector<int> rank_ascending(std::span<const double> values);

// --- tests ------------------------------------------------------------------

struct TTestResult {
    double t = 0.0;
    double p = 1.0;
    double df = 0.0;
};

/// Welch two-sample t-test, two-sided.
/// Throws InvalidArgument (n < 2) or DegenerateVariance (both constant).
TTestResult ttest_two_sample(std::span<const double> a, std::span<const double> b);

struct PairTest {
    std::string a;
    std::string b;
    TTestResult result;
    bool significant = false;  // p <= alpha
};

/// Welch tests over every unordered pair of named samples, in input order.
std::vector<PairTest> pairwise_ttests(
    std::span<const std::pair<std::string, std::vector<double>>> samples, double alpha);

struct CorrelationResult {
    double rho = 0.0;
    double p = 1.0;
    std::size_t n = 0;
};

/// Pearson correlation with a two-sided p-value from the t distribution.
/// Throws InsufficientOverlap (n < 3) or DegenerateVariance.
CorrelationResult pearson(std::span<const double> x, std::span<const double> y);

struct GrangerResult {
    double F = 0.0;
    double p = 1.0;
    int lag = 1;
    std::size_t n_used = 0;   // rows in both regressions
    double df_num = 0.0;
    double df_den = 0.0;
    bool perfect_fit = false;  // RSS_u ~ 0: F = +inf, p = 0
};

/// Does `cause` help predict `effect` beyond effect's own `lag` lags?
/// Throws InsufficientOverlap, DegenerateVariance or SingularDesign.
GrangerResult granger(std::span<const double> cause, std::span<const double> effect, int lag);

// --- distributions ----------------------------------------------------------

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);
double student_t_cdf(double t, double df);
double fisher_f_cdf(double f, double df1, double df2);

// --- series alignment and the per-coin pipeline -------------------------------

struct Aligned {
    std::vector<Date> dates;
    std::vector<double> x;
    std::vector<double> y;
};

/// Inner join on exact dates; both inputs must be date-sorted.
Aligned inner_join(std::span<const Observation> x, std::span<const Observation> y);

struct CausalityReport {
    double pearson_rho = 0.0;
    double pearson_p = 1.0;
    double granger_F = 0.0;
    double granger_p = 1.0;
    int lag = 1;
    std::size_t n_used = 0;
    bool perfect_fit = false;
};

/// Clips both series at 1, joins them on date, then correlates price with v
/// and tests whether v Granger-causes the price.
CausalityReport analyze_pair(const PriceSeries& price, const VSeries& v, int lag);

}  // namespace stablecoin::stats
