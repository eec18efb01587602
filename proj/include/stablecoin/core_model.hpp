#pragma once

#include "stablecoin/economy.hpp"
#include "stablecoin/types.hpp"

namespace stablecoin {

/// Beliefs about the next period used by the Hold payoff.
struct FutureState {
    double market_supply = 0.0;     // M'
    double redemption_value = 0.0;  // v'
};

/// What a user receives per redeemed coin right now.
///
///   Fiat   : 1 if Q <= V^f, else V^f / Q
///   Crypto : r^c(Q, th) if Q <= V^c(th), else r^c(Q, th) * V^c(th) / Q
///   Algo   : r^c(Q, th)
///   Over   : r^c(Q, th) * o(th) if D^L(th) > 0 or the user is a good debtor, else 0
///
/// Throws InvalidQ when Q is outside [0, T^s].
double redemption_value(const StablecoinSpec& spec, const EconomyFunctions& econ,
                        const FundamentalState& theta, const UserContext& ctx);

/// Payoff of one coin under `action`:
///   Sell -> p(M), Redeem -> v, Hold -> max(i(p(M')), i(v')).
double payoff(Action action, const StablecoinSpec& spec, const EconomyFunctions& econ,
              const FundamentalState& theta, double market_supply, const FutureState& future,
              const UserContext& ctx);

/// Redemption value a holder can still count on next period when the
/// redemption volume is believed to be Q: the current value, except that a
/// reserve-backed design whose reserves the belief exhausts pays nothing.
double future_redemption_value(const StablecoinSpec& spec, const EconomyFunctions& econ,
                               const FundamentalState& theta, const UserContext& ctx);

/// Redemption value available to anyone arbitraging the market at belief Q.
/// For Over without liquidations only good debtors redeem, and they support
/// the price only when they are believed to be redeeming (Q > 0).
double market_support(const StablecoinSpec& spec, const EconomyFunctions& econ,
                      const FundamentalState& theta, double believed_q);

/// Price the market is expected to settle at next period: the redemption
/// mechanism lifts it to the supported value, capped at the peg; without
/// support it falls back to e(theta).
double anticipated_price(const StablecoinSpec& spec, const EconomyFunctions& econ,
                         const FundamentalState& theta, double believed_q);

/// Hold payoff under the stationary-future reading used by the game:
/// max(i(anticipated price), i(future redemption value)).
double hold_payoff(const StablecoinSpec& spec, const EconomyFunctions& econ,
                   const FundamentalState& theta, double believed_q, bool good_debtor);

/// True when the user can redeem at all under Over rules.
bool can_redeem(const StablecoinSpec& spec, const EconomyFunctions& econ,
                const FundamentalState& theta, bool good_debtor);

/// Number of good debtors among `n` symmetric agents at theta: the economy's
/// debtor count when outstanding non-liquidated debt is positive, else zero.
int good_debtor_count(const StablecoinSpec& spec, const EconomyFunctions& econ,
                      const FundamentalState& theta, int n);

}  // namespace stablecoin
