#include <gtest/gtest.h>

#include <cmath>

#include "stablecoin/core_model.hpp"
#include "stablecoin/errors.hpp"

using namespace stablecoin;

namespace {

StablecoinSpec make_spec(Design design, double total = 1.0, double fiat = 0.0) {
    StablecoinSpec spec;
    spec.design = design;
    spec.total_supply = total;
    spec.fiat_reserve = fiat;
    return spec;
}

EconomyFunctions reference_economy(double total = 1.0) {
    return build_economy(EconomyParams{}, total);
}

FutureState future(double m, double v) { return {m, v}; }

}  // namespace

TEST(RedemptionValue, FiatWithinReservePaysPar) {
    const auto econ = reference_economy(200.0);
    const auto spec = make_spec(Design::FiatPartial, 200.0, 100.0);
    const FundamentalState th(1.0, econ.interval);
    EXPECT_DOUBLE_EQ(redemption_value(spec, econ, th, {false, 50.0}), 1.0);
}

TEST(RedemptionValue, FiatBeyondReserveIsProRata) {
    const auto econ = reference_economy(200.0);
    const auto spec = make_spec(Design::FiatPartial, 200.0, 100.0);
    const FundamentalState th(1.0, econ.interval);
    EXPECT_DOUBLE_EQ(redemption_value(spec, econ, th, {false, 200.0}), 100.0 / 200.0);
}

TEST(RedemptionValue, OverIsRatioTimesCollateralization) {
    auto econ = reference_economy();
    econ.ratio = [](double, double) { return 0.8; };
    econ.collateralization = [](double) { return 1.5; };
    econ.liquidation_demand = [](double) { return 0.4; };
    const auto spec = make_spec(Design::Over);
    const FundamentalState th(1.0, econ.interval);
    EXPECT_NEAR(redemption_value(spec, econ, th, {false, 0.3}), 0.8 * 1.5, 1e-15);
}

TEST(RedemptionValue, OverWithoutLiquidationPaysNonDebtorNothing) {
    const auto econ = reference_economy();
    const auto spec = make_spec(Design::Over);
    const FundamentalState th(2.0, econ.interval);  // above theta_L, so D^L = 0
    ASSERT_EQ(econ.liquidation_demand(2.0), 0.0);
    EXPECT_EQ(redemption_value(spec, econ, th, {false, 0.2}), 0.0);
    EXPECT_GT(redemption_value(spec, econ, th, {true, 0.2}), 0.0);
}

TEST(RedemptionValue, CryptoScalesDownBeyondReserve) {
    EconomyParams params;
    params.reserve_v0 = 0.5;
    const auto econ = build_economy(params, 1.0);
    const auto spec = make_spec(Design::Crypto);
    const FundamentalState th(1.2, econ.interval);  // V^c = 0.6
    const double r = 1.2 * (1 - 0.5 * 0.9);
    EXPECT_NEAR(redemption_value(spec, econ, th, {false, 0.9}), r * 0.6 / 0.9, 1e-15);
    const double r_small = 1.2 * (1 - 0.5 * 0.3);
    EXPECT_NEAR(redemption_value(spec, econ, th, {false, 0.3}), r_small, 1e-15);
}

TEST(RedemptionValue, AlgoIsTheRatio) {
    const auto econ = reference_economy();
    const auto spec = make_spec(Design::Algo);
    const FundamentalState th(1.5, econ.interval);
    EXPECT_NEAR(redemption_value(spec, econ, th, {false, 0.4}), 1.5 * (1 - 0.5 * 0.4), 1e-15);
}

TEST(RedemptionValue, RejectsQOutsideSupply) {
    const auto econ = reference_economy();
    const auto spec = make_spec(Design::Algo);
    const FundamentalState th(1.5, econ.interval);
    EXPECT_THROW(redemption_value(spec, econ, th, {false, -0.1}), InvalidQ);
    EXPECT_THROW(redemption_value(spec, econ, th, {false, 1.5}), InvalidQ);
}

TEST(RedemptionValue, FiatZeroQTakesFirstBranch) {
    const auto econ = reference_economy();
    const auto spec = make_spec(Design::FiatPartial, 1.0, 0.0);
    const FundamentalState th(1.0, econ.interval);
    EXPECT_EQ(redemption_value(spec, econ, th, {false, 0.0}), 1.0);
}

TEST(RedemptionValue, BoundedByParAndCollateralValue) {
    const auto econ = reference_economy();
    for (Design d : {Design::FiatPartial, Design::Crypto, Design::Algo, Design::Over}) {
        const auto spec = make_spec(d, 1.0, 0.5);
        for (double th = 0.5; th <= 3.0; th += 0.125) {
            const FundamentalState fs(th, econ.interval);
            for (double q = 0.0; q <= 1.0; q += 0.05) {
                const double v = redemption_value(spec, econ, fs, {false, q});
                const double cap = std::max(1.0, econ.ratio(q, th) * econ.collateralization(th));
                EXPECT_GE(v, 0.0);
                EXPECT_LE(v, cap + 1e-12);
                if (is_fiat(d)) EXPECT_LE(v, 1.0);
            }
        }
    }
}

TEST(RedemptionValue, NonincreasingInQNondecreasingInTheta) {
    const auto econ = reference_economy();
    for (Design d : {Design::FiatPartial, Design::Crypto, Design::Algo}) {
        const auto spec = make_spec(d, 1.0, 0.5);
        for (double th = 0.5; th < 3.0; th += 0.25) {
            const FundamentalState lo(th, econ.interval);
            const FundamentalState hi(th + 0.25, econ.interval);
            for (double q = 0.0; q < 1.0; q += 0.05) {
                const double v = redemption_value(spec, econ, lo, {false, q});
                EXPECT_LE(redemption_value(spec, econ, lo, {false, q + 0.05}), v + 1e-12);
                EXPECT_GE(redemption_value(spec, econ, hi, {false, q}), v - 1e-12);
            }
        }
    }
}

TEST(RedemptionValue, AlgoMatchesCryptoWhileReserveCoversQ) {
    const auto econ = reference_economy();
    const auto crypto = make_spec(Design::Crypto);
    const auto algo = make_spec(Design::Algo);
    for (double th = 0.5; th <= 3.0; th += 0.25) {
        const FundamentalState fs(th, econ.interval);
        for (double q = 0.0; q <= std::min(1.0, econ.reserve_value(th)); q += 0.05) {
            EXPECT_EQ(redemption_value(crypto, econ, fs, {false, q}),
                      redemption_value(algo, econ, fs, {false, q}));
        }
    }
}

TEST(Payoff, SellReturnsMarketPrice) {
    const auto econ = reference_economy();
    const auto spec = make_spec(Design::Algo);
    const FundamentalState th(1.0, econ.interval);
    // p(0.3) = 1 - 0.1 * 0.3
    EXPECT_NEAR(payoff(Action::Sell, spec, econ, th, 0.3, future(0.0, 0.0), {}), 0.97, 1e-15);
}

TEST(Payoff, HoldWithIdentityIncentive) {
    const auto econ = reference_economy();
    const auto spec = make_spec(Design::Algo);
    const FundamentalState th(1.0, econ.interval);
    // p(0.5) = 0.95 < v' = 0.98
    EXPECT_NEAR(payoff(Action::Hold, spec, econ, th, 0.0, future(0.5, 0.98), {}), 0.98, 1e-15);
}

TEST(Payoff, HoldWithBoostedIncentive) {
    EconomyParams params;
    params.incentive_rate = 0.2;
    const auto econ = build_economy(params, 1.0);
    const auto spec = make_spec(Design::Algo);
    const FundamentalState th(1.0, econ.interval);
    EXPECT_NEAR(payoff(Action::Hold, spec, econ, th, 0.0, future(0.5, 0.98), {}), 1.2 * 0.98,
                1e-12);
}

TEST(Payoff, RedeemDelegatesToRedemptionValue) {
    const auto econ = reference_economy();
    const auto spec = make_spec(Design::Algo);
    const FundamentalState th(1.4, econ.interval);
    const UserContext ctx{false, 0.6};
    EXPECT_EQ(payoff(Action::Redeem, spec, econ, th, 0.0, future(0.0, 0.0), ctx),
              redemption_value(spec, econ, th, ctx));
}

TEST(Payoff, HoldIsMaxOfFuturePriceAndValue) {
    const auto econ = reference_economy();
    const auto spec = make_spec(Design::Crypto);
    const FundamentalState th(1.0, econ.interval);
    for (double m = 0.0; m <= 1.0; m += 0.1) {
        for (double v = 0.0; v <= 1.2; v += 0.1) {
            const double expected = std::max(1.0 - 0.1 * m, v);
            EXPECT_NEAR(payoff(Action::Hold, spec, econ, th, 0.0, future(m, v), {}), expected,
                        1e-15);
        }
    }
}

TEST(Payoff, RejectsMarketSupplyOutsideRange) {
    const auto econ = reference_economy();
    const auto spec = make_spec(Design::Algo);
    const FundamentalState th(1.0, econ.interval);
    EXPECT_THROW(payoff(Action::Sell, spec, econ, th, -0.1, future(0, 0), {}), InvalidArgument);
    EXPECT_THROW(payoff(Action::Hold, spec, econ, th, 0.0, future(1.5, 0), {}), InvalidArgument);
}

TEST(FutureValue, ExhaustedReserveGivesNothing) {
    const auto econ = reference_economy();
    const auto spec = make_spec(Design::FiatPartial, 1.0, 0.5);
    const FundamentalState th(1.0, econ.interval);
    EXPECT_EQ(future_redemption_value(spec, econ, th, {false, 0.4}), 1.0);
    EXPECT_EQ(future_redemption_value(spec, econ, th, {false, 0.8}), 0.0);
    EXPECT_EQ(anticipated_price(spec, econ, th, 0.8), econ.no_intervention(1.0));
}

TEST(FutureValue, AnticipatedPriceCappedAtPeg) {
    const auto econ = reference_economy();
    const auto spec = make_spec(Design::Algo);
    const FundamentalState th(2.5, econ.interval);
    EXPECT_EQ(anticipated_price(spec, econ, th, 0.0), 1.0);
    const FundamentalState low(0.6, econ.interval);
    // r^c(0, 0.6) = 0.6 < e(0.6)
    EXPECT_EQ(anticipated_price(spec, econ, low, 0.0), econ.no_intervention(0.6));
}

TEST(BuildEconomy, ReferenceLinearFamilyAccepted) {
    EXPECT_NO_THROW(build_economy(EconomyParams{}, 1.0));
    EXPECT_TRUE(collect_economy_violations(build_economy_unchecked(EconomyParams{}, 1.0)).empty());
}

TEST(BuildEconomy, RatioIncreasingInQRejected) {
    EconomyParams params;
    params.alpha = -0.5;
    EXPECT_THROW(build_economy(params, 1.0), MonotonicityViolation);
}

TEST(BuildEconomy, ComplementaryDebtRampsAccepted) {
    const auto econ = reference_economy(3.0);
    for (double th = 0.5; th <= 3.0; th += 0.05) {
        EXPECT_NEAR(econ.liquidation_demand(th) + econ.total_debt(th), 3.0, 1e-12);
    }
}

TEST(BuildEconomy, BrokenSupplyIdentityRejected) {
    auto econ = reference_economy();
    econ.debtor_debt = [](double) { return 0.01; };
    EXPECT_THROW(validate_economy(econ), SupplyConsistencyViolation);
}

TEST(BuildEconomy, IncentiveBelowIdentityRejected) {
    auto econ = reference_economy();
    econ.incentive = [](double x) { return 0.9 * x; };
    EXPECT_THROW(validate_economy(econ), Error);
}

TEST(BuildEconomy, CollectsEveryViolation) {
    auto econ = build_economy_unchecked(EconomyParams{}, 1.0);
    econ.ratio = [](double q, double th) { return th * (1 + 0.5 * q); };
    econ.debtor_debt = [](double) { return 0.01; };
    const auto problems = collect_economy_violations(econ);
    EXPECT_GE(problems.size(), 2u);
}

TEST(BuildEconomy, ExponentialFamily) {
    EconomyParams params;
    params.ratio_family = RatioFamily::Exponential;
    const auto econ = build_economy(params, 2.0);
    EXPECT_NEAR(econ.ratio(1.0, 1.5), 1.5 * std::exp(-0.5), 1e-15);
}

TEST(Types, SpecValidation) {
    EXPECT_NO_THROW(make_spec(Design::FiatFull, 1.0, 1.0).validate());
    EXPECT_THROW(make_spec(Design::FiatFull, 1.0, 0.5).validate(), InvalidArgument);
    EXPECT_THROW(make_spec(Design::FiatPartial, 1.0, 1.0).validate(), InvalidArgument);
    EXPECT_THROW(make_spec(Design::Crypto, 0.0).validate(), InvalidArgument);
}

TEST(Types, FundamentalStateMustLieInInterval) {
    EXPECT_THROW(FundamentalState(0.2, ThetaInterval{0.5, 3.0}), InvalidArgument);
    EXPECT_NO_THROW(FundamentalState(0.5, ThetaInterval{0.5, 3.0}));
}

TEST(Types, NameRoundTrip) {
    for (Design d : {Design::FiatFull, Design::FiatPartial, Design::Crypto, Design::Algo,
                     Design::Over}) {
        EXPECT_EQ(parse_design(to_string(d)), d);
    }
    for (Zone z : {Zone::UniquePeg, Zone::SelfFulfilling, Zone::DepegOnly}) {
        EXPECT_EQ(parse_zone(to_string(z)), z);
    }
    EXPECT_FALSE(parse_design("bogus").has_value());
}

TEST(GoodDebtors, OnlyOverWithOutstandingDebt) {
    const auto econ = reference_economy();
    const FundamentalState hi(2.0, econ.interval);
    const FundamentalState floor(0.5, econ.interval);  // D^L = T, no debt left
    EXPECT_EQ(good_debtor_count(make_spec(Design::Over), econ, hi, 20), 5);
    EXPECT_EQ(good_debtor_count(make_spec(Design::Over), econ, floor, 20), 0);
    EXPECT_EQ(good_debtor_count(make_spec(Design::Algo), econ, hi, 20), 0);
}
