#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stablecoin/core_model.hpp"
#include "stablecoin/economy.hpp"
#include "stablecoin/types.hpp"

namespace stablecoin {

inline constexpr double kThresholdTolerance = 1e-9;

// ---------------------------------------------------------------------------
// Peg-uniqueness conditions
// ---------------------------------------------------------------------------

struct UniquenessConditions {
    bool first = true;   // max{v, i(v'), i(p(M'))} > p(M) whenever p(M) < 1
    bool second = true;  // max{v, i(v'), i(p(M'))} >= 1 whenever p(M) = 1
};

/// Pointwise evaluation of both peg-uniqueness conditions.
UniquenessConditions uniqueness_conditions(double v, double v_future, double p_future, double p_now,
                                       const std::function<double(double)>& incentive);

struct UniquenessCheck {
    bool sufficient_holds = true;  // both conditions at every sampled (M, Q)
    bool necessary_holds = true;   // first condition at every sampled (M, Q) with p(M) < 1
};

/// Checks the conditions over every (M, Q) pair of the two grids. At each
/// pair the future is stationary: v' is the future redemption value at Q and
/// p(M') the anticipated price at Q.
UniquenessCheck check_uniqueness(const StablecoinSpec& spec, const EconomyFunctions& econ,
                             const FundamentalState& theta, std::span<const double> m_grid,
                             std::span<const double> q_grid, bool good_debtor = false);

/// Same check with `points` evenly spaced values of M and Q on [0, T^s].
UniquenessCheck check_uniqueness(const StablecoinSpec& spec, const EconomyFunctions& econ,
                             const FundamentalState& theta, int points = 50,
                             bool good_debtor = false);

// ---------------------------------------------------------------------------
// Thresholds
// ---------------------------------------------------------------------------

/// Lower bound of the unique-peg zone (Crypto/Algo): r^c(T^s, theta) = 1.
/// Returns theta_min when r^c(T^s, theta_min) >= 1; throws NoRoot(Low) when
/// r^c(T^s, theta_max) < 1.
double solve_theta_bar(const StablecoinSpec& spec, const EconomyFunctions& econ);

/// Upper bound of the depeg-only zone: r^c(0, theta) = 1 for Crypto/Algo,
/// r^c(0, theta) * o(theta) = 1 for Over. Same boundary rules as above.
double solve_theta_under(const StablecoinSpec& spec, const EconomyFunctions& econ);

/// Crypto: V^c(theta) = T^s. Over: largest theta with D^L(theta) = T^s.
/// Empty when the interval contains no such point.
std::optional<double> solve_theta_circ(const StablecoinSpec& spec, const EconomyFunctions& econ);

/// Over: r^c(T^s, theta) * o(theta) = 1. Empty when there is no crossing.
std::optional<double> solve_theta_star(const StablecoinSpec& spec, const EconomyFunctions& econ);

struct Thresholds {
    std::optional<double> theta_bar;
    std::optional<double> theta_under;
    std::optional<double> theta_circ;
    std::optional<double> theta_star;
    /// Crypto/Algo/Over: the depeg-only zone covers the whole interval.
    bool all_depeg = false;
};

/// Solves every threshold that applies to the design and checks the
/// preconditions the zone rules rely on (throws AssumptionViolated).
Thresholds compute_thresholds(const StablecoinSpec& spec, const EconomyFunctions& econ);

// ---------------------------------------------------------------------------
// Zones
// ---------------------------------------------------------------------------

Zone classify(const StablecoinSpec& spec, const EconomyFunctions& econ,
              const FundamentalState& theta);

/// Classification against precomputed thresholds.
Zone classify(const StablecoinSpec& spec, const Thresholds& thresholds, double theta);

struct ZoneReport {
    Design design = Design::FiatFull;
    std::optional<double> theta_bar;
    std::optional<double> theta_under;
    std::optional<double> theta_circ;
    std::optional<double> theta_star;
    std::vector<std::pair<double, Zone>> grid;

    /// Zones never go back down along an ascending grid.
    bool is_monotone() const;
};

/// Classifies every grid point (ascending) and attaches the thresholds.
/// `threads` > 1 splits the grid; the output is identical to sequential.
ZoneReport zone_diagram(const StablecoinSpec& spec, const EconomyFunctions& econ,
                        std::span<const double> theta_grid, unsigned threads = 1);

/// `points` evenly spaced thetas on the economy's interval.
std::vector<double> theta_grid(const ThetaInterval& interval, int points);

// ---------------------------------------------------------------------------
// Belief-dependent equilibrium prices
// ---------------------------------------------------------------------------

struct Belief {
    double expected_q = 0.0;
};

struct EquilibriumPoint {
    enum class Kind { Peg, Depeg };

    double price = 1.0;
    double market_supply = 0.0;  // M*
    Kind kind = Kind::Peg;
    std::string supporting_belief;
};

std::string_view to_string(EquilibriumPoint::Kind kind);

/// Equilibria consistent with a symmetric belief about the redemption
/// volume: the peg when the best non-selling payoff reaches 1, otherwise the
/// depeg price where selling stops paying (e(theta), or the redemption value
/// when that is higher). A belief that exhausts reserves settles at e(theta).
std::vector<EquilibriumPoint> equilibrium_prices(const StablecoinSpec& spec,
                                                 const EconomyFunctions& econ,
                                                 const FundamentalState& theta,
                                                 const Belief& belief);

/// Market supply that produces `price`, clamped to [0, T^s].
double market_supply_for_price(const EconomyFunctions& econ, double price);

}  // namespace stablecoin
