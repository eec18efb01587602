#include "stablecoin/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stablecoin/errors.hpp"

namespace stablecoin {

namespace {

void check_q(const StablecoinSpec& spec, double q) {
    if (!(q >= 0.0) || q > spec.total_supply + kBranchTolerance) {
        throw InvalidQ("redemption demand Q=" + std::to_string(q) + " outside [0, " +
                       std::to_string(spec.total_supply) + "]");
    }
}

bool liquidation_open(const EconomyFunctions& econ, double theta) {
    return econ.liquidation_demand(theta) > kBranchTolerance;
}

// Reserve a reserve-backed design can pay out at theta; infinite for Algo/Over.
double reserve_capacity(const StablecoinSpec& spec, const EconomyFunctions& econ, double theta) {
    if (is_fiat(spec.design)) return spec.fiat_reserve;
    if (spec.design == Design::Crypto) return econ.reserve_value(theta);
    return HUGE_VAL;
}

}  // namespace

bool can_redeem(const StablecoinSpec& spec, const EconomyFunctions& econ,
                const FundamentalState& theta, bool good_debtor) {
    if (spec.design != Design::Over) return true;
    return good_debtor || liquidation_open(econ, theta.theta());
}

double redemption_value(const StablecoinSpec& spec, const EconomyFunctions& econ,
                        const FundamentalState& theta, const UserContext& ctx) {
    const double q = ctx.redemption_demand;
    check_q(spec, q);
    const double th = theta.theta();
    switch (spec.design) {
        case Design::FiatFull:
        case Design::FiatPartial:
            // Q = 0 always takes the first branch.
            if (q <= spec.fiat_reserve + kBranchTolerance) return 1.0;
            return spec.fiat_reserve / q;
        case Design::Crypto: {
            const double r = econ.ratio(q, th);
            const double reserve = econ.reserve_value(th);
            if (q <= reserve + kBranchTolerance) return r;
            return r * reserve / q;
        }
        case Design::Algo:
            return econ.ratio(q, th);
        case Design::Over:
            if (can_redeem(spec, econ, theta, ctx.is_good_debtor)) {
                return econ.ratio(q, th) * econ.collateralization(th);
            }
            return 0.0;
    }
    return 0.0;
}

double payoff(Action action, const StablecoinSpec& spec, const EconomyFunctions& econ,
              const FundamentalState& theta, double market_supply, const FutureState& future,
              const UserContext& ctx) {
    const double T = spec.total_supply;
    const auto in_supply = [T](double m) { return m >= 0.0 && m <= T + kBranchTolerance; };
    if (!in_supply(market_supply) || !in_supply(future.market_supply)) {
        throw InvalidArgument("market supply outside [0, T^s]");
    }
    switch (action) {
        case Action::Sell: return econ.price(market_supply);
        case Action::Redeem: return redemption_value(spec, econ, theta, ctx);
        case Action::Hold:
            return std::max(econ.incentive(econ.price(future.market_supply)),
                            econ.incentive(future.redemption_value));
    }
    return 0.0;
}

double future_redemption_value(const StablecoinSpec& spec, const EconomyFunctions& econ,
                               const FundamentalState& theta, const UserContext& ctx) {
    const double q = ctx.redemption_demand;
    if (q > reserve_capacity(spec, econ, theta.theta()) + kBranchTolerance) return 0.0;
    return redemption_value(spec, econ, theta, ctx);
}

double market_support(const StablecoinSpec& spec, const EconomyFunctions& econ,
                      const FundamentalState& theta, double believed_q) {
    check_q(spec, believed_q);
    if (spec.design != Design::Over) {
        return future_redemption_value(spec, econ, theta, {false, believed_q});
    }
    const double th = theta.theta();
    const bool debtors_active = econ.total_debt(th) > kBranchTolerance && believed_q > 0.0;
    if (liquidation_open(econ, th) || debtors_active) {
        return econ.ratio(believed_q, th) * econ.collateralization(th);
    }
    return 0.0;
}

double anticipated_price(const StablecoinSpec& spec, const EconomyFunctions& econ,
                         const FundamentalState& theta, double believed_q) {
    const double support = market_support(spec, econ, theta, believed_q);
    return std::min(1.0, std::max(econ.no_intervention(theta.theta()), support));
}

double hold_payoff(const StablecoinSpec& spec, const EconomyFunctions& econ,
                   const FundamentalState& theta, double believed_q, bool good_debtor) {
    const double future_price = anticipated_price(spec, econ, theta, believed_q);
    const double future_v =
        future_redemption_value(spec, econ, theta, {good_debtor, believed_q});
    return std::max(econ.incentive(future_price), econ.incentive(future_v));
}

int good_debtor_count(const StablecoinSpec& spec, const EconomyFunctions& econ,
                      const FundamentalState& theta, int n) {
    if (spec.design != Design::Over) return 0;
    if (econ.total_debt(theta.theta()) <= kBranchTolerance) return 0;
    return std::clamp(econ.debtors, 0, n);
}

}  // namespace stablecoin
