#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace stablecoin {

/// Absolute tolerance for value comparisons that select a branch.
inline constexpr double kBranchTolerance = 1e-12;

enum class Design { FiatFull, FiatPartial, Crypto, Algo, Over };

enum class Action { Sell, Redeem, Hold };

/// Equilibrium structure at one fundamental state.
///   UniquePeg       - price 1 is the only equilibrium
///   SelfFulfilling  - several equilibria, one of them the peg
///   DepegOnly       - no equilibrium at price 1
enum class Zone { UniquePeg, SelfFulfilling, DepegOnly };

std::string_view to_string(Design design);
std::string_view to_string(Action action);
std::string_view to_string(Zone zone);

std::optional<Design> parse_design(std::string_view text);
std::optional<Zone> parse_zone(std::string_view text);

inline bool is_fiat(Design d) { return d == Design::FiatFull || d == Design::FiatPartial; }
inline bool uses_crypto_ratio(Design d) { return !is_fiat(d); }

struct ThetaInterval {
    double min = 0.0;
    double max = 1.0;

    bool contains(double theta) const { return theta >= min && theta <= max; }
    double width() const { return max - min; }
};

/// A fundamental state: theta together with the interval it lives on.
class FundamentalState {
public:
    FundamentalState(double theta, ThetaInterval range);

    double theta() const { return theta_; }
    const ThetaInterval& range() const { return range_; }

private:
    double theta_;
    ThetaInterval range_;
};

/// Which of the four designs plus its balance-sheet parameters.
struct StablecoinSpec {
    Design design = Design::FiatFull;
    double total_supply = 1.0;   // T^s, coin units
    double fiat_reserve = 0.0;   // V^f, fiat designs only
    std::string collateral_id;   // opaque label for crypto-backed designs

    /// Throws InvalidArgument when the design's reserve constraints fail.
    void validate() const;
};

struct UserContext {
    bool is_good_debtor = false;   // Over only
    double redemption_demand = 0;  // Q, coin units in [0, T^s]
};

}  // namespace stablecoin
