#include "stablecoin/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "stablecoin/core_model.hpp"
#include "stablecoin/errors.hpp"

namespace stablecoin {

namespace {

constexpr double kDeviationTolerance = 1e-12;
constexpr double kDistinctPriceTolerance = 1e-9;

// Aggregate view the payoffs depend on: who sells and who redeems.
struct Counts {
    int sellers = 0;
    int redeemers = 0;
};

class PayoffEngine {
public:
    PayoffEngine(const StablecoinSpec& spec, const EconomyFunctions& econ,
                 const FundamentalState& theta, int n, std::optional<double> belief_q)
        : spec_(spec), econ_(econ), theta_(theta), n_(n),
          has_belief_(belief_q.has_value()), belief_(belief_q.value_or(0.0)) {
        if (has_belief_ && (!(belief_ >= 0.0) || belief_ > spec.total_supply + kBranchTolerance)) {
            throw InvalidQ("belief about Q outside [0, T^s]");
        }
    }

    double coins(int k) const {
        return k >= n_ ? spec_.total_supply : spec_.total_supply * k / n_;
    }

    double payoff(Action alt, Action own, bool good_debtor, const Counts& c) const {
        const int s_others = c.sellers - (own == Action::Sell ? 1 : 0);
        const int q_others = c.redeemers - (own == Action::Redeem ? 1 : 0);
        switch (alt) {
            case Action::Sell:
                return econ_.price(coins(s_others + 1));
            case Action::Redeem: {
                const double q = has_belief_ ? belief_ : coins(q_others + 1);
                return redemption_value(spec_, econ_, theta_, {good_debtor, q});
            }
            case Action::Hold: {
                const double q = has_belief_ ? belief_ : coins(c.redeemers);
                return hold_payoff(spec_, econ_, theta_, q, good_debtor);
            }
        }
        return 0.0;
    }

    Action best(Action own, bool good_debtor, const Counts& c) const {
        const double sell = payoff(Action::Sell, own, good_debtor, c);
        const double redeem = payoff(Action::Redeem, own, good_debtor, c);
        const double hold = payoff(Action::Hold, own, good_debtor, c);
        const double top = std::max({sell, redeem, hold});
        if (hold + kDeviationTolerance >= top) return Action::Hold;
        if (redeem + kDeviationTolerance >= top) return Action::Redeem;
        return Action::Sell;
    }

    bool stable(Action own, bool good_debtor, const Counts& c) const {
        const double current = payoff(own, own, good_debtor, c);
        for (Action alt : {Action::Sell, Action::Redeem, Action::Hold}) {
            if (alt != own && payoff(alt, own, good_debtor, c) > current + kDeviationTolerance) {
                return false;
            }
        }
        return true;
    }

private:
    const StablecoinSpec& spec_;
    const EconomyFunctions& econ_;
    const FundamentalState& theta_;
    int n_;
    bool has_belief_;
    double belief_;
};

Counts counts_of(const AgentPopulation& pop) {
    return {pop.count(Action::Sell), pop.count(Action::Redeem)};
}

void adjust(Counts& c, Action action, int delta) {
    if (action == Action::Sell) c.sellers += delta;
    if (action == Action::Redeem) c.redeemers += delta;
}

EquilibriumPoint point_at(const EconomyFunctions& econ, double market_supply, std::string tag) {
    EquilibriumPoint p;
    p.market_supply = market_supply;
    p.price = market_supply <= 0.0 ? 1.0 : econ.price(market_supply);
    p.kind = market_supply <= 0.0 ? EquilibriumPoint::Kind::Peg : EquilibriumPoint::Kind::Depeg;
    p.supporting_belief = std::move(tag);
    return p;
}

// Keeps one point per price, highest price first.
std::vector<EquilibriumPoint> distinct_prices(std::vector<EquilibriumPoint> points) {
    std::stable_sort(points.begin(), points.end(),
                     [](const auto& a, const auto& b) { return a.price > b.price; });
    std::vector<EquilibriumPoint> out;
    for (auto& p : points) {
        if (out.empty() || std::abs(out.back().price - p.price) > kDistinctPriceTolerance) {
            out.push_back(std::move(p));
        }
    }
    return out;
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

double reserve_capacity(const StablecoinSpec& spec, const EconomyFunctions& econ, double theta) {
    if (is_fiat(spec.design)) return spec.fiat_reserve;
    if (spec.design == Design::Crypto) return econ.reserve_value(theta);
    return HUGE_VAL;
}

}  // namespace

std::string_view to_string(Role role) {
    return role == Role::Plain ? "Plain" : "GoodDebtor";
}

int AgentPopulation::count(Action action) const {
    return static_cast<int>(std::count(actions.begin(), actions.end(), action));
}

int AgentPopulation::count(Role role, Action action) const {
    int k = 0;
    for (std::size_t i = 0; i < actions.size(); ++i) {
        if (roles[i] == role && actions[i] == action) ++k;
    }
    return k;
}

AgentPopulation AgentPopulation::uniform(const StablecoinSpec& spec, const EconomyFunctions& econ,
                                         const FundamentalState& theta, int n, Action init) {
    if (n < 1) throw InvalidArgument("population needs at least one agent");
    AgentPopulation pop;
    pop.total_supply = spec.total_supply;
    pop.actions.assign(n, init);
    pop.roles.assign(n, Role::Plain);
    const int debtors = good_debtor_count(spec, econ, theta, n);
    std::fill_n(pop.roles.begin(), debtors, Role::GoodDebtor);
    return pop;
}

MarketState market_state(const StablecoinSpec& spec, const EconomyFunctions& econ,
                         const FundamentalState& theta, const AgentPopulation& pop) {
    MarketState s;
    s.sellers = pop.count(Action::Sell);
    s.redeemers = pop.count(Action::Redeem);
    s.holders = pop.count(Action::Hold);
    const int n = pop.size();
    const auto coins = [&](int k) { return k >= n ? pop.total_supply : pop.total_supply * k / n; };
    s.market_supply = coins(s.sellers);
    s.redemption_demand = coins(s.redeemers);
    s.price = econ.price(s.market_supply);
    s.remaining_reserve =
        std::max(0.0, reserve_capacity(spec, econ, theta.theta()) - s.redemption_demand);
    return s;
}

double agent_payoff(Action action, int agent, const AgentPopulation& pop,
                    const StablecoinSpec& spec, const EconomyFunctions& econ,
                    const FundamentalState& theta, std::optional<double> belief_q) {
    const PayoffEngine engine(spec, econ, theta, pop.size(), belief_q);
    return engine.payoff(action, pop.actions.at(agent), pop.roles.at(agent) == Role::GoodDebtor,
                         counts_of(pop));
}

Action best_response(int agent, const AgentPopulation& pop, const StablecoinSpec& spec,
                     const EconomyFunctions& econ, const FundamentalState& theta,
                     std::optional<double> belief_q) {
    const PayoffEngine engine(spec, econ, theta, pop.size(), belief_q);
    return engine.best(pop.actions.at(agent), pop.roles.at(agent) == Role::GoodDebtor,
                       counts_of(pop));
}

bool is_equilibrium(const AgentPopulation& pop, const StablecoinSpec& spec,
                    const EconomyFunctions& econ, const FundamentalState& theta,
                    std::optional<double> belief_q) {
    const PayoffEngine engine(spec, econ, theta, pop.size(), belief_q);
    const Counts c = counts_of(pop);
    for (int i = 0; i < pop.size(); ++i) {
        if (!engine.stable(pop.actions[i], pop.roles[i] == Role::GoodDebtor, c)) return false;
    }
    return true;
}

DynamicsResult run_dynamics(const StablecoinSpec& spec, const EconomyFunctions& econ,
                            const FundamentalState& theta, AgentPopulation pop,
                            std::optional<double> belief_q, const DynamicsOptions& options) {
    const int n = pop.size();
    if (n < 1 || n > 10000) throw InvalidArgument("population size must be in [1, 10000]");
    if (static_cast<int>(pop.roles.size()) != n) {
        throw InvalidArgument("population roles and actions differ in length");
    }
    if (options.max_iterations < 1) throw InvalidArgument("max_iterations must be >= 1");

    const PayoffEngine engine(spec, econ, theta, n, belief_q);
    Counts c = counts_of(pop);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::optional<std::mt19937_64> rng;
    if (options.seed) rng.emplace(*options.seed);

    // One sweep; returns the agents that switched.
    const auto pass = [&] {
        if (rng) std::shuffle(order.begin(), order.end(), *rng);
        std::vector<std::pair<int, Action>> switched;
        for (int i : order) {
            const Action now = pop.actions[i];
            const Action next = engine.best(now, pop.roles[i] == Role::GoodDebtor, c);
            if (next != now) {
                adjust(c, now, -1);
                adjust(c, next, +1);
                pop.actions[i] = next;
                switched.emplace_back(i, now);
            }
        }
        return switched;
    };

    DynamicsResult result;
    for (int it = 1; it <= options.max_iterations; ++it) {
        if (pass().empty()) {
            result.converged = true;
            result.iterations = it;
            break;
        }
    }
    if (!result.converged) {
        std::ostringstream msg;
        msg << "best-response dynamics did not settle after " << options.max_iterations
            << " passes; still switching:";
        for (const auto& [agent, from] : pass()) {
            msg << " agent " << agent << " " << to_string(from) << "->"
                << to_string(pop.actions[agent]) << ";";
        }
        throw NonConvergence(msg.str());
    }

    result.final_state = market_state(spec, econ, theta, pop);
    result.final_actions = pop.actions;
    std::string tag = belief_q ? "belief Q=" + fmt(*belief_q) : "realized Q";
    result.equilibrium_set.push_back(point_at(econ, result.final_state.market_supply, tag));
    return result;
}

std::vector<EquilibriumPoint> enumerate_equilibria(const StablecoinSpec& spec,
                                                   const EconomyFunctions& econ,
                                                   const FundamentalState& theta, int n,
                                                   std::optional<double> belief_q) {
    if (n < 1 || n > 24) throw InvalidArgument("exhaustive enumeration supports 1 <= N <= 24");
    const PayoffEngine engine(spec, econ, theta, n, belief_q);
    const int debtors = good_debtor_count(spec, econ, theta, n);
    const int plain = n - debtors;

    // Every member of a non-empty (role, action) group must be content.
    const auto group_ok = [&](int size, Action action, bool good, const Counts& c) {
        return size == 0 || engine.stable(action, good, c);
    };

    std::vector<EquilibriumPoint> found;
    for (int sd = 0; sd <= debtors; ++sd) {
        for (int qd = 0; sd + qd <= debtors; ++qd) {
            const int hd = debtors - sd - qd;
            for (int sp = 0; sp <= plain; ++sp) {
                for (int qp = 0; sp + qp <= plain; ++qp) {
                    const int hp = plain - sp - qp;
                    const Counts c{sd + sp, qd + qp};
                    const bool ok = group_ok(sd, Action::Sell, true, c) &&
                                    group_ok(qd, Action::Redeem, true, c) &&
                                    group_ok(hd, Action::Hold, true, c) &&
                                    group_ok(sp, Action::Sell, false, c) &&
                                    group_ok(qp, Action::Redeem, false, c) &&
                                    group_ok(hp, Action::Hold, false, c);
                    if (ok) {
                        found.push_back(point_at(
                            econ, engine.coins(c.sellers),
                            belief_q ? "belief Q=" + fmt(*belief_q)
                                     : "realized Q=" + fmt(engine.coins(c.redeemers))));
                    }
                }
            }
        }
    }
    return distinct_prices(std::move(found));
}

std::vector<EquilibriumPoint> enumerate_equilibria(const StablecoinSpec& spec,
                                                   const EconomyFunctions& econ,
                                                   const FundamentalState& theta, int n) {
    std::vector<EquilibriumPoint> all;
    for (std::optional<double> belief :
         {std::optional<double>{}, std::optional<double>{0.0},
          std::optional<double>{spec.total_supply}}) {
        auto found = enumerate_equilibria(spec, econ, theta, n, belief);
        all.insert(all.end(), found.begin(), found.end());
    }
    return distinct_prices(std::move(all));
}

Zone zone_from_equilibria(std::span<const EquilibriumPoint> equilibria) {
    std::vector<EquilibriumPoint> points(equilibria.begin(), equilibria.end());
    points = distinct_prices(std::move(points));
    const bool peg = std::any_of(points.begin(), points.end(), [](const auto& p) {
        return p.kind == EquilibriumPoint::Kind::Peg;
    });
    if (!peg) return Zone::DepegOnly;
    return points.size() == 1 ? Zone::UniquePeg : Zone::SelfFulfilling;
}

DynamicsResult estimate_zone(const StablecoinSpec& spec, const EconomyFunctions& econ,
                             const FundamentalState& theta, int n,
                             const DynamicsOptions& options) {
    DynamicsResult out;
    out.converged = true;
    std::vector<EquilibriumPoint> all = enumerate_equilibria(spec, econ, theta, n);
    bool first = true;
    for (double belief : {0.0, spec.total_supply}) {
        for (Action init : {Action::Hold, Action::Sell}) {
            auto run = run_dynamics(spec, econ, theta,
                                    AgentPopulation::uniform(spec, econ, theta, n, init), belief,
                                    options);
            out.iterations += run.iterations;
            if (first) {
                out.final_state = run.final_state;
                out.final_actions = run.final_actions;
                first = false;
            }
            for (auto& p : run.equilibrium_set) {
                p.supporting_belief += init == Action::Hold ? ", from all-Hold" : ", from all-Sell";
                all.push_back(std::move(p));
            }
        }
    }
    out.equilibrium_set = distinct_prices(std::move(all));
    out.zone_estimate = zone_from_equilibria(out.equilibrium_set);
    return out;
}

bool peg_reachable(const StablecoinSpec& spec, const EconomyFunctions& econ,
                   const FundamentalState& theta, int n, double belief_q,
                   const DynamicsOptions& options) {
    const auto run = run_dynamics(
        spec, econ, theta, AgentPopulation::uniform(spec, econ, theta, n, Action::Sell), belief_q,
        options);
    return run.final_state.sellers == 0;
}

// ---------------------------------------------------------------------------

std::vector<PathPoint> simulate_run(const StablecoinSpec& spec, const EconomyFunctions& econ,
                                    std::span<const double> theta_path, const Shock& shock,
                                    const SimulationOptions& options) {
    const int n = options.agents;
    if (n < 1 || n > 10000) throw InvalidArgument("simulation agents must be in [1, 10000]");
    if (options.max_rounds < 1) throw InvalidArgument("max_rounds must be >= 1");
    if (shock.redeemed_fraction < 0.0 || shock.redeemed_fraction > 1.0) {
        throw InvalidArgument("shock fraction must be in [0, 1]");
    }
    const double T = spec.total_supply;
    double supply = T;
    double q_cum = 0.0;
    double last_flow = 0.0;
    std::vector<Action> actions(n, Action::Hold);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::optional<std::mt19937_64> rng;
    if (options.seed) rng.emplace(*options.seed);

    std::vector<PathPoint> path;
    path.reserve(theta_path.size());
    for (std::size_t t = 0; t < theta_path.size(); ++t) {
        const FundamentalState fs(theta_path[t], econ.interval);
        double forced = 0.0;
        if (static_cast<int>(t) == shock.step) {
            forced = shock.redeemed_fraction * supply;
            q_cum = std::min(T, q_cum + forced);
            supply -= forced;
        }
        const double h = supply / n;
        const double believed_q = std::min(T, q_cum + last_flow);
        const int debtors = good_debtor_count(spec, econ, fs, n);
        Counts c{static_cast<int>(std::count(actions.begin(), actions.end(), Action::Sell)),
                 static_cast<int>(std::count(actions.begin(), actions.end(), Action::Redeem))};

        // Price responds to the share of circulating coins sold; redemption
        // value to the cumulative redeemed volume.
        const auto best = [&](Action own, bool good) {
            const int s_others = c.sellers - (own == Action::Sell ? 1 : 0);
            const int q_others = c.redeemers - (own == Action::Redeem ? 1 : 0);
            const double sell = econ.price(T * (s_others + 1) / n);
            const double redeem = supply > 0.0
                ? redemption_value(spec, econ, fs, {good, std::min(T, q_cum + (q_others + 1) * h)})
                : 0.0;
            const double hold = hold_payoff(spec, econ, fs, believed_q, good);
            const double top = std::max({sell, redeem, hold});
            if (hold + kDeviationTolerance >= top) return Action::Hold;
            if (redeem + kDeviationTolerance >= top) return Action::Redeem;
            return Action::Sell;
        };

        bool settled = false;
        for (int round = 0; round < options.max_rounds && !settled; ++round) {
            if (rng) std::shuffle(order.begin(), order.end(), *rng);
            settled = true;
            for (int i : order) {
                const Action next = best(actions[i], i < debtors);
                if (next != actions[i]) {
                    adjust(c, actions[i], -1);
                    adjust(c, next, +1);
                    actions[i] = next;
                    settled = false;
                }
            }
        }
        if (!settled) {
            throw NonConvergence("agents did not settle within step " + std::to_string(t));
        }

        const double redeemed = c.redeemers * h;
        q_cum = std::min(T, q_cum + redeemed);
        supply = std::max(0.0, supply - redeemed);
        last_flow = redeemed + forced;

        PathPoint p;
        p.step = static_cast<int>(t);
        p.theta = fs.theta();
        p.market_supply = c.sellers * h;
        p.redemption_demand = q_cum;
        p.price = econ.price(T * c.sellers / n);
        p.ratio = econ.ratio(q_cum, fs.theta());
        p.circulating = supply;
        path.push_back(p);
    }
    return path;
}

}  // namespace stablecoin
