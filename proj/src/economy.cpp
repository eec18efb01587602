#include "stablecoin/economy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stablecoin/errors.hpp"

namespace stablecoin {

namespace {

struct Violation {
    bool supply = false;  // SupplyConsistencyViolation vs MonotonicityViolation
    std::string function;
    std::string detail;

    std::string str() const {
        return std::string(supply ? "SupplyConsistencyViolation" : "MonotonicityViolation") + ": " +
               function + ": " + detail;
    }
};

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = lo + (hi - lo) * i / (n - 1);
    return out;
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(10);
    os << x;
    return os.str();
}

enum class Trend { StrictlyIncreasing, NonDecreasing, StrictlyDecreasing, NonIncreasing };

// Reports the first adjacent pair of grid points that breaks `trend`.
void check_trend(const std::string& name, const std::vector<double>& xs,
                 const std::function<double(double)>& f, Trend trend,
                 std::vector<Violation>& out) {
    double prev = f(xs[0]);
    for (std::size_t i = 1; i < xs.size(); ++i) {
        const double cur = f(xs[i]);
        bool ok = true;
        switch (trend) {
            case Trend::StrictlyIncreasing: ok = cur > prev; break;
            case Trend::NonDecreasing: ok = cur >= prev - kBranchTolerance; break;
            case Trend::StrictlyDecreasing: ok = cur < prev; break;
            case Trend::NonIncreasing: ok = cur <= prev + kBranchTolerance; break;
        }
        if (!ok || !std::isfinite(cur)) {
            static const char* names[] = {"strictly increasing", "nondecreasing",
                                          "strictly decreasing", "nonincreasing"};
            out.push_back({false, name,
                           std::string("not ") + names[static_cast<int>(trend)] + " between x=" +
                               fmt(xs[i - 1]) + " (" + fmt(prev) + ") and x=" + fmt(xs[i]) +
                               " (" + fmt(cur) + ")"});
            return;
        }
        prev = cur;
    }
}

void check_range(const std::string& name, const std::vector<double>& xs,
                 const std::function<double(double)>& f, double lo, double hi, bool open_lo,
                 bool open_hi, std::vector<Violation>& out) {
    for (double x : xs) {
        const double y = f(x);
        const bool below = open_lo ? !(y > lo) : !(y >= lo - kBranchTolerance);
        const bool above = open_hi ? !(y < hi) : !(y <= hi + kBranchTolerance);
        if (below || above || !std::isfinite(y)) {
            out.push_back({false, name,
                           "value " + fmt(y) + " at x=" + fmt(x) + " outside " +
                               (open_lo ? "(" : "[") + fmt(lo) + ", " + fmt(hi) +
                               (open_hi ? ")" : "]")});
            return;
        }
    }
}

std::vector<Violation> violations(const EconomyFunctions& econ) {
    std::vector<Violation> out;
    const double T = econ.total_supply;
    if (!(econ.interval.min < econ.interval.max)) {
        out.push_back({false, "interval", "theta_min must be < theta_max"});
        return out;
    }
    const auto thetas = linspace(econ.interval.min, econ.interval.max, kValidationGridPoints);
    const auto supply = linspace(0.0, T, kValidationGridPoints);
    const auto values = linspace(0.0, 2.0, kValidationGridPoints);

    check_trend("p(M)", supply, econ.price, Trend::StrictlyDecreasing, out);
    check_range("p(M)", supply, econ.price, 0.0, 1.0, false, false, out);

    check_trend("e(theta)", thetas, econ.no_intervention, Trend::StrictlyIncreasing, out);
    check_range("e(theta)", thetas, econ.no_intervention, 0.0, 1.0, true, true, out);

    check_trend("i(x)", values, econ.incentive, Trend::NonDecreasing, out);
    for (double x : values) {
        if (econ.incentive(x) < x - kBranchTolerance) {
            out.push_back({false, "i(x)", "i(x) < x at x=" + fmt(x)});
            break;
        }
    }

    // r^c: nonincreasing in Q (flat is the limiting robust-collateral case),
    // strictly increasing in theta, positive.
    for (double th : thetas) {
        const auto in_q = [&](double q) { return econ.ratio(q, th); };
        const std::size_t before = out.size();
        check_trend("r^c(Q, theta=" + fmt(th) + ")", supply, in_q, Trend::NonIncreasing, out);
        check_range("r^c(Q, theta=" + fmt(th) + ")", supply, in_q, 0.0, HUGE_VAL, true, false, out);
        if (out.size() != before) break;
    }
    for (double q : {0.0, 0.5 * T, T}) {
        const auto in_theta = [&](double th) { return econ.ratio(q, th); };
        const std::size_t before = out.size();
        check_trend("r^c(Q=" + fmt(q) + ", theta)", thetas, in_theta, Trend::StrictlyIncreasing,
                    out);
        if (out.size() != before) break;
    }

    check_trend("V^c(theta)", thetas, econ.reserve_value, Trend::StrictlyIncreasing, out);
    check_range("V^c(theta)", thetas, econ.reserve_value, 0.0, HUGE_VAL, false, false, out);

    check_trend("o(theta)", thetas, econ.collateralization, Trend::NonDecreasing, out);
    check_range("o(theta)", thetas, econ.collateralization, 0.0, HUGE_VAL, false, false, out);

    check_trend("D^L(theta)", thetas, econ.liquidation_demand, Trend::NonIncreasing, out);
    check_range("D^L(theta)", thetas, econ.liquidation_demand, 0.0, T, false, false, out);
    check_trend("D_u(theta)", thetas, econ.debtor_debt, Trend::NonDecreasing, out);
    check_range("D_u(theta)", thetas, econ.debtor_debt, 0.0, T, false, false, out);

    if (econ.debtors < 0) out.push_back({false, "debtors", "debtor count must be >= 0"});
    for (double th : thetas) {
        const double total = econ.liquidation_demand(th) + econ.total_debt(th);
        if (std::abs(total - T) > kSupplyTolerance) {
            out.push_back({true, "D^L + sum D_u",
                           "equals " + fmt(total) + " != T^s=" + fmt(T) + " at theta=" + fmt(th)});
            break;
        }
    }
    return out;
}

}  // namespace

std::string_view to_string(RatioFamily family) {
    return family == RatioFamily::Linear ? "linear" : "exponential";
}

bool EconomyFunctions::identity_incentive() const {
    for (const double x : linspace(0.0, 2.0, 21)) {
        if (std::abs(incentive(x) - x) > kBranchTolerance) return false;
    }
    return true;
}

std::vector<std::string> collect_economy_violations(const EconomyFunctions& econ) {
    std::vector<std::string> out;
    for (const auto& v : violations(econ)) out.push_back(v.str());
    return out;
}

void validate_economy(const EconomyFunctions& econ) {
    const auto found = violations(econ);
    if (found.empty()) return;
    const auto& first = found.front();
    if (first.supply) throw SupplyConsistencyViolation(first.function + ": " + first.detail);
    throw MonotonicityViolation(first.function + ": " + first.detail);
}

EconomyFunctions build_economy_unchecked(const EconomyParams& p, double total_supply) {
    if (!(total_supply > 0.0)) throw InvalidArgument("total supply must be positive");
    if (!(p.interval.min < p.interval.max)) throw InvalidArgument("theta_min must be < theta_max");
    if (p.debtors < 1) throw InvalidArgument("economy.liquidation.debtors must be >= 1");

    const double T = total_supply;
    const ThetaInterval iv = p.interval;
    EconomyFunctions econ;
    econ.interval = iv;
    econ.total_supply = T;
    econ.debtors = p.debtors;

    econ.price = [beta = p.beta, T](double m) { return 1.0 - beta * m / T; };
    econ.no_intervention = [p, iv](double th) {
        return p.e_min + (p.e_max - p.e_min) * (th - iv.min) / iv.width();
    };
    econ.incentive = [s = p.incentive_rate](double x) { return (1.0 + s) * x; };
    if (p.ratio_family == RatioFamily::Linear) {
        econ.ratio = [a = p.alpha, T](double q, double th) { return th * (1.0 - a * q / T); };
    } else {
        econ.ratio = [k = p.k, T](double q, double th) { return th * std::exp(-k * q / T); };
    }
    econ.reserve_value = [v0 = p.reserve_v0](double th) { return v0 * th; };
    econ.collateralization = [o0 = p.collateral_o0](double th) { return std::max(0.0, o0 * th); };
    econ.liquidation_demand = [tl = p.liquidation_theta, lo = iv.min, T](double th) {
        if (tl <= lo) return th <= tl ? T : 0.0;
        return T * std::clamp((tl - th) / (tl - lo), 0.0, 1.0);
    };
    econ.debtor_debt = [liq = econ.liquidation_demand, n = p.debtors, T](double th) {
        return (T - liq(th)) / n;
    };

    return econ;
}

EconomyFunctions build_economy(const EconomyParams& params, double total_supply) {
    EconomyFunctions econ = build_economy_unchecked(params, total_supply);
    validate_economy(econ);
    return econ;
}

}  // namespace stablecoin
