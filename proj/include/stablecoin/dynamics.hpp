#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "stablecoin/economy.hpp"
#include "stablecoin/equilibrium.hpp"
#include "stablecoin/types.hpp"

namespace stablecoin {

enum class Role { Plain, GoodDebtor };

std::string_view to_string(Role role);

/// N symmetric agents holding T^s/N coins each.
struct AgentPopulation {
    double total_supply = 1.0;
    std::vector<Role> roles;
    std::vector<Action> actions;

    int size() const { return static_cast<int>(actions.size()); }
    double holding() const { return total_supply / size(); }
    int count(Action action) const;
    int count(Role role, Action action) const;

    /// Everyone starts with `init`; for Over the first good_debtor_count()
    /// agents are debtors.
    static AgentPopulation uniform(const StablecoinSpec& spec, const EconomyFunctions& econ,
                                   const FundamentalState& theta, int n, Action init);
};

struct MarketState {
    double market_supply = 0.0;      // M
    double redemption_demand = 0.0;  // Q
    double price = 1.0;              // p(M)
    double remaining_reserve = 0.0;  // V^f - Q, V^c - Q, or +inf
    int sellers = 0;
    int redeemers = 0;
    int holders = 0;
};

MarketState market_state(const StablecoinSpec& spec, const EconomyFunctions& econ,
                         const FundamentalState& theta, const AgentPopulation& pop);

/// Payoff agent `agent` would get from `action` with everyone else fixed.
/// Its own coins are added to M (Sell) or Q (Redeem). With no belief the
/// redemption volume is the realized one.
double agent_payoff(Action action, int agent, const AgentPopulation& pop,
                    const StablecoinSpec& spec, const EconomyFunctions& econ,
                    const FundamentalState& theta, std::optional<double> belief_q);

/// Payoff-maximizing action; ties go Hold > Redeem > Sell.
Action best_response(int agent, const AgentPopulation& pop, const StablecoinSpec& spec,
                     const EconomyFunctions& econ, const FundamentalState& theta,
                     std::optional<double> belief_q);

/// No agent gains more than 1e-12 by switching action.
bool is_equilibrium(const AgentPopulation& pop, const StablecoinSpec& spec,
                    const EconomyFunctions& econ, const FundamentalState& theta,
                    std::optional<double> belief_q);

struct DynamicsOptions {
    int max_iterations = 1000;          // full passes over the population
    std::optional<std::uint64_t> seed;  // shuffled update order per pass when set
};

struct DynamicsResult {
    bool converged = false;
    int iterations = 0;
    MarketState final_state;
    std::vector<Action> final_actions;
    std::vector<EquilibriumPoint> equilibrium_set;
    std::optional<Zone> zone_estimate;
};

/// Sequential best-response updates until a full pass changes nothing.
/// Throws NonConvergence (listing the actions still flipping) after
/// `max_iterations` passes.
DynamicsResult run_dynamics(const StablecoinSpec& spec, const EconomyFunctions& econ,
                            const FundamentalState& theta, AgentPopulation init,
                            std::optional<double> belief_q, const DynamicsOptions& options = {});

/// Every aggregate profile (sellers and redeemers per role) that is an
/// equilibrium under one belief about Q; nullopt means the realized Q.
/// Distinct prices only, highest first.
std::vector<EquilibriumPoint> enumerate_equilibria(const StablecoinSpec& spec,
                                                   const EconomyFunctions& econ,
                                                   const FundamentalState& theta, int n,
                                                   std::optional<double> belief_q);

/// Union over the realized-Q closure and the extreme beliefs Q = 0 and
/// Q = T^s.
std::vector<EquilibriumPoint> enumerate_equilibria(const StablecoinSpec& spec,
                                                   const EconomyFunctions& econ,
                                                   const FundamentalState& theta, int n);

/// Oracle zone: equilibria from enumeration plus dynamics started all-Hold
/// and all-Sell under the beliefs Q = 0 and Q = T^s.
DynamicsResult estimate_zone(const StablecoinSpec& spec, const EconomyFunctions& econ,
                             const FundamentalState& theta, int n,
                             const DynamicsOptions& options = {});

/// Zone implied by a set of equilibria.
Zone zone_from_equilibria(std::span<const EquilibriumPoint> equilibria);

/// True when dynamics started from the all-Sell state under `belief_q`
/// end at the peg.
bool peg_reachable(const StablecoinSpec& spec, const EconomyFunctions& econ,
                   const FundamentalState& theta, int n, double belief_q,
                   const DynamicsOptions& options = {});

// ---------------------------------------------------------------------------
// Multi-step simulation
// ---------------------------------------------------------------------------

struct Shock {
    int step = -1;                  // no shock when negative
    double redeemed_fraction = 0.0;  // of the circulating supply
};

struct SimulationOptions {
    int agents = 100;
    int max_rounds = 1000;
    std::optional<std::uint64_t> seed;
};

struct PathPoint {
    int step = 0;
    double theta = 0.0;
    double market_supply = 0.0;      // coins sold this step
    double redemption_demand = 0.0;  // cumulative redeemed coins
    double price = 1.0;
    double ratio = 0.0;              // r^c at the cumulative Q
    double circulating = 0.0;
};

/// Discrete-time path. Each step the forced shock (if any) is redeemed,
/// then agents settle on best responses given the cumulative Q and the
/// redemption flow of the previous step. Redeemed coins are burned.
std::vector<PathPoint> simulate_run(const StablecoinSpec& spec, const EconomyFunctions& econ,
                                    std::span<const double> theta_path, const Shock& shock,
                                    const SimulationOptions& options = {});

}  // namespace stablecoin
