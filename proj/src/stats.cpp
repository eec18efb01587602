#include "stablecoin/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "stablecoin/errors.hpp"

namespace stablecoin::stats {

namespace {

void check_sorted(std::span<const Observation> obs, const char* what) {
    for (std::size_t i = 1; i < obs.size(); ++i) {
        if (!(obs[i - 1].date < obs[i].date)) {
            throw InvalidArgument(std::string(what) + " dates must be strictly increasing");
        }
    }
}

std::vector<double> values_of(std::span<const Observation> obs) {
    std::vector<double> out;
    out.reserve(obs.size());
    for (const auto& o : obs) out.push_back(o.value);
    return out;
}

double rms(const std::vector<double>& squares) {
    if (squares.empty()) throw EmptySeries("deviation of an empty series");
    return std::sqrt(std::accumulate(squares.begin(), squares.end(), 0.0) /
                     static_cast<double>(squares.size()));
}

double mean(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v, double m) {
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return ss / static_cast<double>(v.size() - 1);
}

// Two-sided tail probability of |t| under Student-t(df).
double two_sided_t(double t, double df) {
    if (std::isinf(t)) return 0.0;
    const boost::math::students_t dist(df);
    return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

// Residual sum of squares of the least-squares fit; SingularDesign when
// the columns are linearly dependent.
double ols_rss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const char* which) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < X.cols()) {
        throw SingularDesign(std::string(which) + " regression design is rank deficient (rank " +
                             std::to_string(qr.rank()) + " of " + std::to_string(X.cols()) + ")");
    }
    const Eigen::VectorXd beta = qr.solve(y);
    return (y - X * beta).squaredNorm();
}

}  // namespace

Target Target::band(double lo, double hi) {
    if (!(lo <= hi)) throw InvalidArgument("band target needs lo <= hi");
    return {lo, hi};
}

void PriceSeries::validate() const {
    check_sorted(observations, "price series");
    for (const auto& o : observations) {
        if (!(o.value > 0.0)) throw NonPositivePrice("price series holds a non-positive price");
    }
}

std::vector<double> PriceSeries::values() const { return values_of(observations); }

void VSeries::validate() const {
    check_sorted(observations, "v series");
    for (const auto& o : observations) {
        if (!(o.value >= 0.0)) throw InvalidArgument("v series holds a negative value");
    }
}

std::vector<double> VSeries::values() const { return values_of(observations); }

// ---------------------------------------------------------------------------

std::vector<double> squared_deviations(const PriceSeries& series) {
    std::vector<double> out;
    out.reserve(series.observations.size());
    for (const auto& o : series.observations) {
        const double p = o.value;
        const double d = p < series.target.lo ? series.target.lo - p
                         : p > series.target.hi ? p - series.target.hi
                                                : 0.0;
        out.push_back(d * d);
    }
    return out;
}

std::vector<double> downward_squared_deviations(const PriceSeries& series) {
    std::vector<double> out;
    out.reserve(series.observations.size());
    for (const auto& o : series.observations) {
        const double d = std::min(o.value - series.target.lo, 0.0);
        out.push_back(d * d);
    }
    return out;
}

double price_deviation(const PriceSeries& series) { return rms(squared_deviations(series)); }

double downward_deviation(const PriceSeries& series) {
    return rms(downward_squared_deviations(series));
}

DeviationReport deviation_report(const PriceSeries& series) {
    return {price_deviation(series), downward_deviation(series), series.observations.size()};
}

std::vector<double> downward_clip(std::span<const double> values, double cap) {
    std::vector<double> out(values.begin(), values.end());
    for (double& x : out) x = std::min(x, cap);
    return out;
}

std::vector<Observation> downward_clip(std::span<const Observation> series, double cap) {
    std::vector<Observation> out(series.begin(), series.end());
    for (auto& o : out) o.value = std::min(o.value, cap);
    return out;
}

std::vector<int> rank_ascending(std::span<const double> values) {
    std::vector<std::size_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<int> rank(values.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const bool tied = k > 0 && values[idx[k]] == values[idx[k - 1]];
        rank[idx[k]] = tied ? rank[idx[k - 1]] : static_cast<int>(k + 1);
    }
    return rank;
}

// ---------------------------------------------------------------------------

TTestResult ttest_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) {
        throw InvalidArgument("t-test needs at least two observations per sample");
    }
    const double ma = mean(a);
    const double mb = mean(b);
    const double va = sample_variance(a, ma) / static_cast<double>(a.size());
    const double vb = sample_variance(b, mb) / static_cast<double>(b.size());
    if (va == 0.0 && vb == 0.0) {
        throw DegenerateVariance("both t-test samples are constant");
    }
    TTestResult r;
    r.t = (ma - mb) / std::sqrt(va + vb);
    r.df = (va + vb) * (va + vb) /
           (va * va / static_cast<double>(a.size() - 1) +
            vb * vb / static_cast<double>(b.size() - 1));
    r.p = two_sided_t(r.t, r.df);
    return r;
}

std::vector<PairTest> pairwise_ttests(
    std::span<const std::pair<std::string, std::vector<double>>> samples, double alpha) {
    std::vector<PairTest> out;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        for (std::size_t j = i + 1; j < samples.size(); ++j) {
            PairTest t;
            t.a = samples[i].first;
            t.b = samples[j].first;
            t.result = ttest_two_sample(samples[i].second, samples[j].second);
            t.significant = t.result.p <= alpha;
            out.push_back(std::move(t));
        }
    }
    return out;
}

CorrelationResult pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InvalidArgument("pearson inputs differ in length");
    const std::size_t n = x.size();
    if (n < 3) throw InsufficientOverlap("pearson needs at least 3 paired observations");
    const double mx = mean(x);
    const double my = mean(y);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw DegenerateVariance("pearson input has zero variance");

    CorrelationResult r;
    r.n = n;
    r.rho = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    const double df = static_cast<double>(n - 2);
    const double one_minus = 1.0 - r.rho * r.rho;
    r.p = one_minus <= 0.0 ? 0.0 : two_sided_t(r.rho * std::sqrt(df / one_minus), df);
    return r;
}

GrangerResult granger(std::span<const double> cause, std::span<const double> effect, int lag) {
    if (cause.size() != effect.size()) throw InvalidArgument("granger inputs differ in length");
    if (lag < 1) throw InvalidArgument("granger lag must be >= 1");
    const auto n = static_cast<long>(effect.size());
    const long rows = n - lag;
    const long df_den = rows - 2L * lag - 1;
    if (rows <= 0 || df_den <= 0) {
        throw InsufficientOverlap("granger with lag " + std::to_string(lag) + " needs more than " +
                                  std::to_string(3 * lag + 1) + " observations, got " +
                                  std::to_string(n));
    }
    const double first = effect[0];
    if (std::all_of(effect.begin(), effect.end(), [&](double e) { return e == first; })) {
        throw DegenerateVariance("granger effect series is constant");
    }

    Eigen::VectorXd y(rows);
    Eigen::MatrixXd restricted(rows, 1 + lag);
    Eigen::MatrixXd unrestricted(rows, 1 + 2 * lag);
    for (long r = 0; r < rows; ++r) {
        const long t = r + lag;
        y(r) = effect[t];
        restricted(r, 0) = 1.0;
        unrestricted(r, 0) = 1.0;
        for (int k = 1; k <= lag; ++k) {
            restricted(r, k) = effect[t - k];
            unrestricted(r, k) = effect[t - k];
            unrestricted(r, lag + k) = cause[t - k];
        }
    }
    const double rss_r = ols_rss(restricted, y, "restricted");
    const double rss_u = ols_rss(unrestricted, y, "unrestricted");

    GrangerResult g;
    g.lag = lag;
    g.n_used = static_cast<std::size_t>(rows);
    g.df_num = lag;
    g.df_den = static_cast<double>(df_den);
    const double scale = std::max(1.0, (y.array() - y.mean()).square().sum());
    if (rss_u < 1e-14 * scale) {
        g.perfect_fit = true;
        g.F = std::numeric_limits<double>::infinity();
        g.p = 0.0;
        return g;
    }
    g.F = std::max(0.0, (rss_r - rss_u) / lag) / (rss_u / g.df_den);
    const boost::math::fisher_f dist(g.df_num, g.df_den);
    g.p = boost::math::cdf(boost::math::complement(dist, g.F));
    return g;
}

// ---------------------------------------------------------------------------

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0) || !(x >= 0.0 && x <= 1.0)) {
        throw InvalidArgument("incomplete beta needs a, b > 0 and x in [0, 1]");
    }
    return boost::math::ibeta(a, b, x);
}

double student_t_cdf(double t, double df) {
    if (!(df > 0.0)) throw InvalidArgument("t distribution needs df > 0");
    if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
    return boost::math::cdf(boost::math::students_t(df), t);
}

double fisher_f_cdf(double f, double df1, double df2) {
    if (!(df1 > 0.0) || !(df2 > 0.0)) throw InvalidArgument("F distribution needs df > 0");
    if (f <= 0.0) return 0.0;
    if (std::isinf(f)) return 1.0;
    return boost::math::cdf(boost::math::fisher_f(df1, df2), f);
}

// ---------------------------------------------------------------------------

Aligned inner_join(std::span<const Observation> x, std::span<const Observation> y) {
    check_sorted(x, "joined");
    check_sorted(y, "joined");
    Aligned out;
    std::size_t i = 0, j = 0;
    while (i < x.size() && j < y.size()) {
        if (x[i].date < y[j].date) {
            ++i;
        } else if (y[j].date < x[i].date) {
            ++j;
        } else {
            out.dates.push_back(x[i].date);
            out.x.push_back(x[i].value);
            out.y.push_back(y[j].value);
            ++i;
            ++j;
        }
    }
    return out;
}

CausalityReport analyze_pair(const PriceSeries& price, const VSeries& v, int lag) {
    const auto p = downward_clip(price.observations);
    const auto w = downward_clip(v.observations);
    const Aligned a = inner_join(p, w);
    if (a.x.size() < 3) {
        throw InsufficientOverlap("price and v series share only " + std::to_string(a.x.size()) +
                                  " dates");
    }
    const auto c = pearson(a.x, a.y);
    const auto g = granger(a.y, a.x, lag);
    return {c.rho, c.p, g.F, g.p, g.lag, g.n_used, g.perfect_fit};
}

}  // namespace stablecoin::stats
