#include "stablecoin/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "stablecoin/errors.hpp"
#include "stablecoin/roots.hpp"

namespace stablecoin {

namespace {

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    return out;
}

void require_design(const StablecoinSpec& spec, std::initializer_list<Design> allowed,
                    const char* what) {
    for (Design d : allowed) {
        if (spec.design == d) return;
    }
    throw InvalidArgument(std::string(what) + " is not defined for design " +
                          std::string(to_string(spec.design)));
}

// Smallest double in (lo, hi] with f >= 0, given f(lo) < 0 <= f(hi) and f
// increasing. Bisects down to adjacent doubles so that a threshold compared
// with `theta >= threshold` agrees with the sign of f itself.
double first_nonnegative(const std::function<double(double)>& f, double lo, double hi) {
    for (int it = 0; it < 2000; ++it) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        (f(mid) >= 0.0 ? hi : lo) = mid;
    }
    return hi;
}

// Threshold of an increasing `f` on the interval; theta_min when f is
// already non-negative there.
double increasing_crossing(const std::function<double(double)>& f, const ThetaInterval& iv,
                           const std::string& name) {
    if (f(iv.min) >= 0.0) return iv.min;
    if (f(iv.max) < 0.0) {
        throw NoRoot(NoRoot::Side::Low, name + " stays below 1 on [" + fmt(iv.min) + ", " +
                                            fmt(iv.max) + "]");
    }
    return first_nonnegative(f, iv.min, iv.max);
}

std::optional<double> optional_crossing(const std::function<double(double)>& f,
                                        const ThetaInterval& iv) {
    if (f(iv.min) >= 0.0) return iv.min;
    if (f(iv.max) < 0.0) return std::nullopt;
    return first_nonnegative(f, iv.min, iv.max);
}

}  // namespace

// ---------------------------------------------------------------------------

UniquenessConditions uniqueness_conditions(double v, double v_future, double p_future, double p_now,
                                       const std::function<double(double)>& incentive) {
    const double best = std::max({v, incentive(v_future), incentive(p_future)});
    UniquenessConditions out;
    if (p_now < 1.0 - kBranchTolerance) {
        out.first = best > p_now;
    } else {
        out.second = best >= 1.0 - kBranchTolerance;
    }
    return out;
}

UniquenessCheck check_uniqueness(const StablecoinSpec& spec, const EconomyFunctions& econ,
                             const FundamentalState& theta, std::span<const double> m_grid,
                             std::span<const double> q_grid, bool good_debtor) {
    UniquenessCheck out;
    for (double q : q_grid) {
        const UserContext ctx{good_debtor, q};
        const double v = redemption_value(spec, econ, theta, ctx);
        const double v_future = future_redemption_value(spec, econ, theta, ctx);
        const double p_future = anticipated_price(spec, econ, theta, q);
        for (double m : m_grid) {
            const auto c = uniqueness_conditions(v, v_future, p_future, econ.price(m), econ.incentive);
            out.necessary_holds = out.necessary_holds && c.first;
            out.sufficient_holds = out.sufficient_holds && c.first && c.second;
        }
    }
    return out;
}

UniquenessCheck check_uniqueness(const StablecoinSpec& spec, const EconomyFunctions& econ,
                             const FundamentalState& theta, int points, bool good_debtor) {
    const auto grid = linspace(0.0, spec.total_supply, points);
    return check_uniqueness(spec, econ, theta, grid, grid, good_debtor);
}

// ---------------------------------------------------------------------------

double solve_theta_bar(const StablecoinSpec& spec, const EconomyFunctions& econ) {
    require_design(spec, {Design::Crypto, Design::Algo}, "theta_bar");
    const double T = spec.total_supply;
    return increasing_crossing([&](double th) { return econ.ratio(T, th) - 1.0; }, econ.interval,
                               "r^c(T^s, theta)");
}

double solve_theta_under(const StablecoinSpec& spec, const EconomyFunctions& econ) {
    require_design(spec, {Design::Crypto, Design::Algo, Design::Over}, "theta_under");
    if (spec.design == Design::Over) {
        return increasing_crossing(
            [&](double th) { return econ.ratio(0.0, th) * econ.collateralization(th) - 1.0; },
            econ.interval, "r^c(0, theta) * o(theta)");
    }
    return increasing_crossing([&](double th) { return econ.ratio(0.0, th) - 1.0; },
                               econ.interval, "r^c(0, theta)");
}

std::optional<double> solve_theta_circ(const StablecoinSpec& spec, const EconomyFunctions& econ) {
    const ThetaInterval& iv = econ.interval;
    const double T = spec.total_supply;
    if (spec.design == Design::Crypto) {
        return optional_crossing([&](double th) { return econ.reserve_value(th) - T; }, iv);
    }
    if (spec.design == Design::Over) {
        // D^L is nonincreasing: find where it leaves T^s.
        const auto saturated = [&](double th) {
            return econ.liquidation_demand(th) >= T;
        };
        if (!saturated(iv.min)) return std::nullopt;
        if (saturated(iv.max)) return iv.max;
        double lo = iv.min;
        double hi = iv.max;
        for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
            const double mid = lo + 0.5 * (hi - lo);
            (saturated(mid) ? lo : hi) = mid;
        }
        return lo;
    }
    return std::nullopt;
}

std::optional<double> solve_theta_star(const StablecoinSpec& spec, const EconomyFunctions& econ) {
    if (spec.design != Design::Over) return std::nullopt;
    const double T = spec.total_supply;
    const auto f = [&](double th) { return econ.ratio(T, th) * econ.collateralization(th) - 1.0; };
    return optional_crossing(f, econ.interval);
}

Thresholds compute_thresholds(const StablecoinSpec& spec, const EconomyFunctions& econ) {
    spec.validate();
    if (!econ.identity_incentive()) {
        throw AssumptionViolated("zone analysis assumes no holding incentive (i(x) = x)");
    }
    Thresholds t;
    const double T = spec.total_supply;
    switch (spec.design) {
        case Design::FiatFull:
            t.theta_bar = econ.interval.min;
            break;
        case Design::FiatPartial:
            break;
        case Design::Crypto:
        case Design::Algo: {
            try {
                t.theta_under = solve_theta_under(spec, econ);
            } catch (const NoRoot&) {
                t.all_depeg = true;
            }
            try {
                t.theta_bar = solve_theta_bar(spec, econ);
            } catch (const NoRoot&) {
            }
            if (spec.design == Design::Crypto) {
                t.theta_circ = solve_theta_circ(spec, econ);
                if (t.theta_under &&
                    econ.reserve_value(*t.theta_under) < T - kThresholdTolerance) {
                    throw AssumptionViolated(
                        "crypto zones require V^c(theta_under) >= T^s; V^c(" +
                        fmt(*t.theta_under) + ") = " + fmt(econ.reserve_value(*t.theta_under)));
                }
            }
            break;
        }
        case Design::Over: {
            try {
                t.theta_under = solve_theta_under(spec, econ);
            } catch (const NoRoot&) {
                t.all_depeg = true;
            }
            t.theta_circ = solve_theta_circ(spec, econ);
            t.theta_star = solve_theta_star(spec, econ);
            if (t.theta_circ) {
                const double th = *t.theta_circ;
                const double value = econ.ratio(0.0, th) * econ.collateralization(th);
                if (!(value < 1.0)) {
                    throw AssumptionViolated(
                        "over-collateralized zones require r^c(0, theta) * o(theta) < 1 while "
                        "D^L(theta) = T^s; at theta=" + fmt(th) + " it is " + fmt(value));
                }
            }
            if (t.theta_star && econ.liquidation_demand(*t.theta_star) > kBranchTolerance) {
                throw AssumptionViolated(
                    "over-collateralized zones require liquidations to be closed (D^L = 0) from "
                    "theta_star=" + fmt(*t.theta_star) + " upward");
            }
            break;
        }
    }
    return t;
}

Zone classify(const StablecoinSpec& spec, const Thresholds& t, double theta) {
    switch (spec.design) {
        case Design::FiatFull: return Zone::UniquePeg;
        case Design::FiatPartial: return Zone::SelfFulfilling;
        case Design::Crypto:
        case Design::Algo:
            if (t.all_depeg || !t.theta_under || theta < *t.theta_under) return Zone::DepegOnly;
            if (t.theta_bar && theta >= *t.theta_bar) return Zone::UniquePeg;
            return Zone::SelfFulfilling;
        case Design::Over:
            if (t.all_depeg || !t.theta_under || theta < *t.theta_under) return Zone::DepegOnly;
            return Zone::SelfFulfilling;
    }
    return Zone::DepegOnly;
}

Zone classify(const StablecoinSpec& spec, const EconomyFunctions& econ,
              const FundamentalState& theta) {
    return classify(spec, compute_thresholds(spec, econ), theta.theta());
}

bool ZoneReport::is_monotone() const {
    const auto rank = [](Zone z) {
        switch (z) {
            case Zone::DepegOnly: return 0;
            case Zone::SelfFulfilling: return 1;
            case Zone::UniquePeg: return 2;
        }
        return 0;
    };
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (rank(grid[i].second) < rank(grid[i - 1].second)) return false;
    }
    return true;
}

std::vector<double> theta_grid(const ThetaInterval& interval, int points) {
    if (points < 2) throw InvalidArgument("a theta grid needs at least 2 points");
    auto grid = linspace(interval.min, interval.max, points);
    grid.back() = interval.max;
    return grid;
}

ZoneReport zone_diagram(const StablecoinSpec& spec, const EconomyFunctions& econ,
                        std::span<const double> grid, unsigned threads) {
    if (!std::is_sorted(grid.begin(), grid.end())) {
        throw InvalidArgument("theta grid must be sorted ascending");
    }
    for (double th : grid) FundamentalState(th, econ.interval);

    const Thresholds t = compute_thresholds(spec, econ);
    ZoneReport report;
    report.design = spec.design;
    report.theta_bar = t.theta_bar;
    report.theta_under = t.theta_under;
    report.theta_circ = t.theta_circ;
    report.theta_star = t.theta_star;
    report.grid.resize(grid.size());

    const auto fill = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            report.grid[i] = {grid[i], classify(spec, t, grid[i])};
        }
    };
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(grid.size())));
    if (threads == 1) {
        fill(0, grid.size());
    } else {
        std::vector<std::jthread> workers;
        const std::size_t chunk = (grid.size() + threads - 1) / threads;
        for (std::size_t begin = 0; begin < grid.size(); begin += chunk) {
            workers.emplace_back(fill, begin, std::min(grid.size(), begin + chunk));
        }
    }
    return report;
}

// ---------------------------------------------------------------------------

std::string_view to_string(EquilibriumPoint::Kind kind) {
    return kind == EquilibriumPoint::Kind::Peg ? "Peg" : "Depeg";
}

double market_supply_for_price(const EconomyFunctions& econ, double price) {
    const double T = econ.total_supply;
    if (price >= econ.price(0.0)) return 0.0;
    if (price <= econ.price(T)) return T;
    return *bisect([&](double m) { return econ.price(m) - price; }, 0.0, T);
}

std::vector<EquilibriumPoint> equilibrium_prices(const StablecoinSpec& spec,
                                                 const EconomyFunctions& econ,
                                                 const FundamentalState& theta,
                                                 const Belief& belief) {
    const double T = spec.total_supply;
    const double q = belief.expected_q;
    if (!(q >= 0.0) || q > T + kBranchTolerance) {
        throw InvalidQ("believed redemption volume outside [0, T^s]");
    }
    const double th = theta.theta();
    const UserContext plain{false, q};

    const double v = redemption_value(spec, econ, theta, plain);
    const double hold = hold_payoff(spec, econ, theta, q, false);
    const double support = market_support(spec, econ, theta, q);
    const double e = econ.no_intervention(th);

    std::string tag = q <= 0.5 * T ? "low-Q belief" : "high-Q belief";
    if (spec.design == Design::Crypto) {
        if (const auto circ = solve_theta_circ(spec, econ); circ && th < *circ) {
            tag += "; theta < theta_circ";
        }
    }

    // The peg holds when someone will always pay at least 1 for a coin:
    // redeemers directly, holders through the future, or arbitrageurs.
    const double best = std::max({v, hold, econ.incentive(std::min(1.0, support))});
    if (best >= 1.0 - kBranchTolerance) {
        return {{1.0, 0.0, EquilibriumPoint::Kind::Peg, tag}};
    }

    const bool exhausted =
        future_redemption_value(spec, econ, theta, plain) == 0.0 && v > 0.0 &&
        (is_fiat(spec.design) || spec.design == Design::Crypto);
    double price = exhausted ? e : std::max(e, best);
    if (exhausted) tag += "; reserves exhausted";
    price = std::max(price, econ.price(T));
    return {{price, market_supply_for_price(econ, price), EquilibriumPoint::Kind::Depeg, tag}};
}

}  // namespace stablecoin
