#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "stablecoin/errors.hpp"
#include "stablecoin/stats.hpp"

using namespace stablecoin;
using namespace stablecoin::stats;
using namespace std::chrono;

namespace {

// Adaptive Simpson quadrature, used as an independent CDF oracle.
double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm,
               double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
        return left + right + (left + right - whole) / 15.0;
    }
    return simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b) {
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson(f, a, b, fa, fm, fb, whole, 1e-13, 60);
}

double oracle_t_cdf(double t, double df) {
    const double c = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) /
                     std::sqrt(df * M_PI);
    const auto pdf = [=](double x) { return c * std::pow(1 + x * x / df, -(df + 1) / 2); };
    const double half = integrate(pdf, 0.0, std::abs(t));
    return t >= 0 ? 0.5 + half : 0.5 - half;
}

// F density integrated in u = sqrt(x), which removes the x^(d1/2 - 1) pole.
double oracle_f_cdf(double x, double d1, double d2) {
    const double log_norm = 0.5 * d1 * std::log(d1) + 0.5 * d2 * std::log(d2) -
                            (std::lgamma(d1 / 2) + std::lgamma(d2 / 2) - std::lgamma((d1 + d2) / 2));
    const auto g = [=](double u) {
        if (u == 0.0) return d1 == 1.0 ? 2.0 * std::exp(log_norm - (d1 + d2) / 2 * std::log(d2)) : 0.0;
        const double xx = u * u;
        return 2.0 * u *
               std::exp(log_norm + (d1 / 2 - 1) * std::log(xx) - (d1 + d2) / 2 * std::log(d2 + d1 * xx));
    };
    return integrate(g, 0.0, std::sqrt(x));
}

PriceSeries series(std::vector<double> prices, Target target = Target::point()) {
    PriceSeries s;
    s.target = target;
    sys_days day = sys_days{year{2022} / May / 1};
    for (double p : prices) {
        s.observations.push_back({day, p});
        day += days{1};
    }
    return s;
}

std::vector<double> normals(std::uint64_t seed, int n, double mean) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(mean, 1.0);
    std::vector<double> out(n);
    for (auto& x : out) x = d(rng);
    return out;
}

// Lag-1 Granger F by normal equations and Gaussian elimination.
double oracle_granger_lag1(const std::vector<double>& x, const std::vector<double>& y) {
    const auto rss = [&](int k) {
        const std::size_t rows = y.size() - 1;
        std::vector<std::vector<double>> A(k, std::vector<double>(k + 1, 0.0));
        const auto regressor = [&](std::size_t t, int j) {
            return j == 0 ? 1.0 : j == 1 ? y[t - 1] : x[t - 1];
        };
        for (std::size_t t = 1; t <= rows; ++t) {
            for (int i = 0; i < k; ++i) {
                for (int j = 0; j < k; ++j) A[i][j] += regressor(t, i) * regressor(t, j);
                A[i][k] += regressor(t, i) * y[t];
            }
        }
        for (int c = 0; c < k; ++c) {
            for (int r = c + 1; r < k; ++r) {
                const double f = A[r][c] / A[c][c];
                for (int j = c; j <= k; ++j) A[r][j] -= f * A[c][j];
            }
        }
        std::vector<double> b(k);
        for (int r = k - 1; r >= 0; --r) {
            double s = A[r][k];
            for (int j = r + 1; j < k; ++j) s -= A[r][j] * b[j];
            b[r] = s / A[r][r];
        }
        double out = 0.0;
        for (std::size_t t = 1; t <= rows; ++t) {
            double fit = 0.0;
            for (int j = 0; j < k; ++j) fit += b[j] * regressor(t, j);
            out += (y[t] - fit) * (y[t] - fit);
        }
        return out;
    };
    const double r = rss(2);
    const double u = rss(3);
    const double df_den = static_cast<double>(y.size() - 1) - 3.0;
    return (r - u) / (u / df_den);
}

}  // namespace

// --- deviation metrics ------------------------------------------------------

TEST(Deviation, FlatSeriesIsZero) {
    EXPECT_EQ(price_deviation(series({1.0, 1.0, 1.0})), 0.0);
    EXPECT_EQ(downward_deviation(series({1.0, 1.0, 1.0})), 0.0);
}

TEST(Deviation, SymmetricPair) {
    const auto s = series({0.99, 1.01});
    const double a = 0.99 - 1.0;
    const double b = 1.01 - 1.0;
    EXPECT_NEAR(price_deviation(s), std::sqrt((a * a + b * b) / 2), 1e-12);
    EXPECT_NEAR(price_deviation(s), 0.01, 1e-12);
    EXPECT_NEAR(downward_deviation(s), std::sqrt(a * a / 2), 1e-12);
    EXPECT_NEAR(downward_deviation(s), std::sqrt(5e-5), 1e-12);
}

TEST(Deviation, BandTarget) {
    const auto s = series({1.0, 1.0043}, Target::band(0.9933, 1.0033));
    const double over = 1.0043 - 1.0033;
    EXPECT_NEAR(price_deviation(s), std::sqrt(over * over / 2), 1e-12);
    EXPECT_NEAR(price_deviation(s), 7.0711e-4, 1e-7);
    EXPECT_EQ(downward_deviation(s), 0.0);
    const auto low = series({0.99, 1.0}, Target::band(0.9933, 1.0033));
    const double under = 0.99 - 0.9933;
    EXPECT_NEAR(downward_deviation(low), std::sqrt(under * under / 2), 1e-12);
}

TEST(Deviation, OnlyAboveTargetHasNoDownside) {
    EXPECT_EQ(downward_deviation(series({1.0, 1.02})), 0.0);
}

TEST(Deviation, DownwardNeverExceedsTotalAndDuplicationInvariant) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d(0.9, 1.1);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> p(30);
        for (auto& x : p) x = d(rng);
        std::vector<double> doubled;
        for (double x : p) {
            doubled.push_back(x);
            doubled.push_back(x);
        }
        const auto s = series(p);
        const auto s2 = series(doubled);
        EXPECT_LE(downward_deviation(s), price_deviation(s));
        EXPECT_NEAR(price_deviation(s2), price_deviation(s), 1e-15);
        EXPECT_NEAR(downward_deviation(s2), downward_deviation(s), 1e-15);
        const auto report = deviation_report(s);
        EXPECT_EQ(report.n, 30u);
        EXPECT_EQ(report.deviation, price_deviation(s));
    }
}

TEST(Deviation, EmptySeriesRejected) {
    EXPECT_THROW(price_deviation(series({})), EmptySeries);
    EXPECT_THROW(downward_deviation(series({})), EmptySeries);
}

TEST(Deviation, UnsortedDatesRejected) {
    auto s = series({1.0, 1.0});
    std::swap(s.observations[0].date, s.observations[1].date);
    EXPECT_THROW(s.validate(), InvalidArgument);
}

TEST(Clip, CapsAtOne) {
    const std::vector<double> v{0.9, 1.1};
    EXPECT_EQ(downward_clip(v), (std::vector<double>{0.9, 1.0}));
    const std::vector<double> below{0.5, 0.99, 1.0};
    EXPECT_EQ(downward_clip(below), below);
}

TEST(Rank, AscendingWithSharedTies) {
    const std::vector<double> v{0.3, 0.1, 0.3, 0.2};
    EXPECT_EQ(rank_ascending(v), (std::vector<int>{3, 1, 3, 2}));
}

// --- distributions ----------------------------------------------------------

TEST(Distributions, MatchNumericIntegrationOracle) {
    const std::vector<std::pair<double, double>> t_probes{
        {-3.2, 1}, {-1.0, 2}, {-0.3, 3.5}, {0.0, 5}, {0.4, 7}, {1.1, 10},
        {2.0, 15}, {2.7, 30}, {-2.2, 60}, {4.5, 120}};
    for (const auto& [t, df] : t_probes) {
        EXPECT_NEAR(student_t_cdf(t, df), oracle_t_cdf(t, df), 1e-8) << "t=" << t << " df=" << df;
    }
    const std::vector<std::array<double, 3>> f_probes{
        {{0.2, 1, 5}}, {{0.8, 1, 20}}, {{1.5, 2, 10}}, {{3.0, 3, 12}}, {{0.5, 4, 40}},
        {{2.2, 5, 5}}, {{7.5, 1, 98}}, {{1.0, 6, 30}}, {{4.0, 2, 200}}, {{0.05, 3, 8}}};
    for (const auto& [x, d1, d2] : f_probes) {
        EXPECT_NEAR(fisher_f_cdf(x, d1, d2), oracle_f_cdf(x, d1, d2), 1e-8)
            << "x=" << x << " d1=" << d1 << " d2=" << d2;
    }
}

TEST(Distributions, IncompleteBetaAgainstQuadrature) {
    for (const auto& [a, b, x] : std::vector<std::array<double, 3>>{
             {{1, 1, 0.3}}, {{2, 3, 0.4}}, {{5, 1.5, 0.8}}, {{3.5, 7, 0.25}}}) {
        const double norm = std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
        const double expected =
            integrate([a = a, b = b](double t) { return std::pow(t, a - 1) * std::pow(1 - t, b - 1); },
                      0.0, x) / norm;
        EXPECT_NEAR(incomplete_beta(a, b, x), expected, 1e-10);
    }
    EXPECT_EQ(incomplete_beta(2, 3, 0.0), 0.0);
    EXPECT_EQ(incomplete_beta(2, 3, 1.0), 1.0);
}

// --- t-test -----------------------------------------------------------------

TEST(TTest, IdenticalSamples) {
    const std::vector<double> a{0.1, 0.4, 0.2, 0.7};
    const auto r = ttest_two_sample(a, a);
    EXPECT_EQ(r.t, 0.0);
    EXPECT_NEAR(r.p, 1.0, 1e-15);
}

TEST(TTest, BothConstantIsDegenerate) {
    const std::vector<double> a{0, 0, 0, 0};
    const std::vector<double> b{1, 1, 1, 1};
    EXPECT_THROW(ttest_two_sample(a, b), DegenerateVariance);
}

TEST(TTest, TooFewObservations) {
    const std::vector<double> a{1.0};
    const std::vector<double> b{1.0, 2.0};
    EXPECT_THROW(ttest_two_sample(a, b), InvalidArgument);
}

TEST(TTest, ShiftedNormalsAgainstOracle) {
    const auto a = normals(42, 100, 0.0);
    const auto b = normals(43, 100, 1.0);
    const auto r = ttest_two_sample(a, b);
    EXPECT_LT(r.p, 0.01);

    const auto moments = [](const std::vector<double>& v) {
        double m = 0;
        for (double x : v) m += x;
        m /= v.size();
        double s = 0;
        for (double x : v) s += (x - m) * (x - m);
        return std::pair{m, s / (v.size() - 1)};
    };
    const auto [ma, va] = moments(a);
    const auto [mb, vb] = moments(b);
    const double se2 = va / a.size() + vb / b.size();
    const double t = (ma - mb) / std::sqrt(se2);
    const double df = se2 * se2 / ((va / a.size()) * (va / a.size()) / (a.size() - 1) +
                                   (vb / b.size()) * (vb / b.size()) / (b.size() - 1));
    EXPECT_NEAR(r.t, t, 1e-12);
    EXPECT_NEAR(r.df, df, 1e-9);
    EXPECT_NEAR(r.p, 2.0 * oracle_t_cdf(-std::abs(t), df), 1e-8);
}

TEST(TTest, SwappingSamplesNegatesT) {
    const auto a = normals(1, 40, 0.0);
    const auto b = normals(2, 25, 0.3);
    const auto ab = ttest_two_sample(a, b);
    const auto ba = ttest_two_sample(b, a);
    EXPECT_EQ(ab.t, -ba.t);
    EXPECT_EQ(ab.p, ba.p);
}

TEST(TTest, PairwiseCoversEveryPair) {
    std::vector<std::pair<std::string, std::vector<double>>> samples{
        {"a", normals(1, 30, 0.0)}, {"b", normals(2, 30, 0.0)}, {"c", normals(3, 30, 2.0)}};
    const auto tests = pairwise_ttests(samples, 0.1);
    ASSERT_EQ(tests.size(), 3u);
    EXPECT_EQ(tests[0].a, "a");
    EXPECT_EQ(tests[0].b, "b");
    EXPECT_EQ(tests[2].a, "b");
    EXPECT_EQ(tests[2].b, "c");
    EXPECT_TRUE(tests[1].significant);
    EXPECT_EQ(tests[1].significant, tests[1].result.p <= 0.1);
}

// --- correlation ------------------------------------------------------------

TEST(Pearson, PerfectCorrelation) {
    const std::vector<double> x{1, 2, 3};
    const std::vector<double> up{1, 2, 3};
    const std::vector<double> down{3, 2, 1};
    EXPECT_NEAR(pearson(x, up).rho, 1.0, 1e-12);
    EXPECT_NEAR(pearson(x, down).rho, -1.0, 1e-12);
    EXPECT_EQ(pearson(x, up).p, 0.0);
}

TEST(Pearson, HandComputedCase) {
    const std::vector<double> x{1, 2, 3, 4};
    const std::vector<double> y{1, 2, 3, 5};
    // means 2.5 and 2.75
    const double sxy = (-1.5) * (-1.75) + (-0.5) * (-0.75) + 0.5 * 0.25 + 1.5 * 2.25;
    const double sxx = 2.25 + 0.25 + 0.25 + 2.25;
    const double syy = 1.75 * 1.75 + 0.75 * 0.75 + 0.25 * 0.25 + 2.25 * 2.25;
    const double rho = sxy / std::sqrt(sxx * syy);
    const auto r = pearson(x, y);
    EXPECT_NEAR(r.rho, rho, 1e-12);
    const double t = rho * std::sqrt(2.0 / (1 - rho * rho));
    EXPECT_NEAR(r.p, 2.0 * oracle_t_cdf(-t, 2.0), 1e-8);
    EXPECT_EQ(r.n, 4u);
}

TEST(Pearson, AffineImagesAreExact) {
    const auto x = normals(9, 50, 0.0);
    std::vector<double> pos;
    std::vector<double> neg;
    for (double v : x) {
        pos.push_back(3.0 + 2.5 * v);
        neg.push_back(-1.0 - 0.7 * v);
    }
    EXPECT_NEAR(pearson(x, pos).rho, 1.0, 1e-12);
    EXPECT_NEAR(pearson(x, neg).rho, -1.0, 1e-12);
}

TEST(Pearson, Errors) {
    const std::vector<double> two{1, 2};
    EXPECT_THROW(pearson(two, two), InsufficientOverlap);
    const std::vector<double> x{1, 2, 3};
    const std::vector<double> flat{2, 2, 2};
    EXPECT_THROW(pearson(x, flat), DegenerateVariance);
}

// --- Granger ----------------------------------------------------------------

TEST(Granger, IndependentNoise) {
    const auto cause = normals(100, 500, 0.0);
    const auto effect = normals(200, 500, 0.0);
    const auto r = granger(cause, effect, 1);
    EXPECT_TRUE(std::isfinite(r.F));
    EXPECT_GE(r.F, 0.0);
    EXPECT_EQ(r.lag, 1);
    EXPECT_EQ(r.n_used, 499u);
    EXPECT_NEAR(r.F, oracle_granger_lag1(cause, effect), 1e-8 * std::max(1.0, r.F));
    EXPECT_NEAR(r.p, 1.0 - oracle_f_cdf(r.F, 1, r.df_den), 1e-8);
}

TEST(Granger, LaggedDependenceDetected) {
    const auto cause = normals(7, 300, 0.0);
    const auto noise = normals(8, 300, 0.0);
    std::vector<double> effect(300, 0.0);
    for (std::size_t t = 1; t < effect.size(); ++t) effect[t] = 0.9 * cause[t - 1] + 0.05 * noise[t];
    const auto r = granger(cause, effect, 1);
    EXPECT_GT(r.F, 100.0);
    EXPECT_LT(r.p, 0.01);
    EXPECT_NEAR(r.F, oracle_granger_lag1(cause, effect), 1e-8 * r.F);
}

TEST(Granger, AffineInvariance) {
    const auto cause = normals(17, 200, 0.0);
    const auto noise = normals(18, 200, 0.0);
    std::vector<double> effect(200, 0.0);
    for (std::size_t t = 2; t < effect.size(); ++t) {
        effect[t] = 0.3 * cause[t - 2] + 0.2 * effect[t - 1] + noise[t];
    }
    std::vector<double> cause2;
    std::vector<double> effect2;
    for (double v : cause) cause2.push_back(100.0 + 4.0 * v);
    for (double v : effect) effect2.push_back(-3.0 + 0.01 * v);
    for (int lag : {1, 2, 3}) {
        const auto a = granger(cause, effect, lag);
        const auto b = granger(cause2, effect2, lag);
        EXPECT_NEAR(b.F, a.F, 1e-8 * a.F) << "lag " << lag;
        EXPECT_EQ(a.df_num, lag);
        EXPECT_EQ(a.df_den, static_cast<double>(200 - lag) - 2 * lag - 1);
    }
}

TEST(Granger, ConstantEffectIsDegenerate) {
    const auto cause = normals(1, 50, 0.0);
    const std::vector<double> effect(50, 1.0);
    EXPECT_THROW(granger(cause, effect, 1), DegenerateVariance);
}

TEST(Granger, CollinearLagsAreSingular) {
    const auto effect = normals(3, 50, 0.0);
    EXPECT_THROW(granger(effect, effect, 1), SingularDesign);
}

TEST(Granger, ExactFitFlagged) {
    const auto cause = normals(4, 60, 0.0);
    std::vector<double> effect(60, 0.0);
    const auto noise = normals(5, 60, 0.0);
    effect[0] = noise[0];
    for (std::size_t t = 1; t < effect.size(); ++t) effect[t] = 2.0 * cause[t - 1];
    const auto r = granger(cause, effect, 1);
    EXPECT_TRUE(r.perfect_fit);
    EXPECT_TRUE(std::isinf(r.F));
    EXPECT_EQ(r.p, 0.0);
}

TEST(Granger, TooShort) {
    const std::vector<double> x{1, 2, 3, 4};
    const std::vector<double> y{2, 1, 4, 3};
    EXPECT_THROW(granger(x, y, 2), InsufficientOverlap);
}

// --- pipeline ---------------------------------------------------------------

TEST(Pipeline, InnerJoinKeepsSharedDates) {
    const sys_days d0{year{2022} / May / 1};
    const std::vector<Observation> x{{d0, 1}, {d0 + days{1}, 2}, {d0 + days{3}, 4}};
    const std::vector<Observation> y{{d0 + days{1}, 20}, {d0 + days{2}, 30}, {d0 + days{3}, 40}};
    const auto j = inner_join(x, y);
    EXPECT_EQ(j.x, (std::vector<double>{2, 4}));
    EXPECT_EQ(j.y, (std::vector<double>{20, 40}));
    EXPECT_EQ(j.dates.size(), 2u);
}

TEST(Pipeline, ClipsBeforeCorrelating) {
    const auto noise = normals(61, 120, 0.0);
    PriceSeries price;
    VSeries v;
    const sys_days d0{year{2022} / May / 1};
    for (int i = 0; i < 120; ++i) {
        const double base = 0.98 + 0.01 * noise[i];
        v.observations.push_back({d0 + days{i}, base + (i % 2 ? 0.5 : 0.0)});
        price.observations.push_back({d0 + days{i + 1}, std::min(base, 1.0)});
    }
    std::vector<double> clipped_v;
    std::vector<double> clipped_p;
    for (int i = 1; i < 120; ++i) {
        clipped_v.push_back(std::min(1.0, v.observations[i].value));
        clipped_p.push_back(std::min(1.0, price.observations[i - 1].value));
    }
    const auto report = analyze_pair(price, v, 1);
    EXPECT_EQ(report.n_used, 118u);  // 119 joined dates, one lost to the lag
    EXPECT_NEAR(report.pearson_rho, pearson(clipped_p, clipped_v).rho, 1e-12);
    EXPECT_NEAR(report.granger_F, granger(clipped_v, clipped_p, 1).F, 1e-9 * report.granger_F);
    EXPECT_EQ(report.lag, 1);
}
