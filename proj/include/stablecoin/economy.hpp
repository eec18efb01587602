#pragma once

#include <functional>
#include <string>
#include <vector>

#include "stablecoin/types.hpp"

namespace stablecoin {

/// The abstract economy: every function the game needs, as callables.
/// Immutable once built; obtain one from build_economy() or fill the fields
/// by hand and pass it through validate_economy().
struct EconomyFunctions {
    ThetaInterval interval;
    double total_supply = 1.0;  // T^s the curves are scaled to
    int debtors = 1;            // number of users sharing the non-liquidated debt

    std::function<double(double)> price;                // p(M)
    std::function<double(double)> no_intervention;      // e(theta)
    std::function<double(double)> incentive;            // i(x)
    std::function<double(double, double)> ratio;        // r^c(Q, theta)
    std::function<double(double)> reserve_value;        // V^c(theta)
    std::function<double(double)> collateralization;    // o(theta)
    std::function<double(double)> liquidation_demand;   // D^L(theta)
    std::function<double(double)> debtor_debt;          // D_u(theta), per debtor

    /// Sum of D_u over all debtors.
    double total_debt(double theta) const { return debtors * debtor_debt(theta); }

    /// True when i(x) == x (within tolerance) on [0, 2].
    bool identity_incentive() const;
};

enum class RatioFamily { Linear, Exponential };

/// Parameters of the built-in parametric families.
///
///   p(M)    = 1 - beta * M / T
///   e(th)   = e_min + (e_max - e_min) * (th - th_min) / (th_max - th_min)
///   r^c     = th * (1 - alpha * Q / T)       (linear)
///           = th * exp(-k * Q / T)           (exponential)
///   V^c(th) = v0 * th
///   o(th)   = max(0, o0 * th)
///   i(x)    = (1 + incentive_rate) * x
///   D^L(th) = T * clamp((th_L - th) / (th_L - th_min), 0, 1)
///   D_u(th) = (T - D^L(th)) / debtors
struct EconomyParams {
    ThetaInterval interval{0.5, 3.0};
    double beta = 0.1;
    double e_min = 0.90;
    double e_max = 0.98;
    RatioFamily ratio_family = RatioFamily::Linear;
    double alpha = 0.5;
    double k = 1.0;
    double reserve_v0 = 1.0;
    double collateral_o0 = 1.25;
    double incentive_rate = 0.0;
    double liquidation_theta = 1.0;
    int debtors = 5;
};

std::string_view to_string(RatioFamily family);

/// Grid resolution used by every monotonicity check.
inline constexpr int kValidationGridPoints = 100;
/// Tolerance on D^L + sum D_u == T^s.
inline constexpr double kSupplyTolerance = 1e-9;

/// Builds the parametric economy for `total_supply` and validates it.
/// Throws MonotonicityViolation / SupplyConsistencyViolation / InvalidArgument.
EconomyFunctions build_economy(const EconomyParams& params, double total_supply);

/// The same curves without the invariant checks.
EconomyFunctions build_economy_unchecked(const EconomyParams& params, double total_supply);

/// Checks every invariant of the economy on a 100-point grid and throws on
/// the first violated function; use collect_economy_violations() for all.
void validate_economy(const EconomyFunctions& econ);

/// Every violated invariant, formatted "<Code>: <function>: <detail>".
std::vector<std::string> collect_economy_violations(const EconomyFunctions& econ);

}  // namespace stablecoin
