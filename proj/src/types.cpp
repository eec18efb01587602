#include "stablecoin/types.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "stablecoin/errors.hpp"

namespace stablecoin {

namespace {

std::string normalize(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        if (c == '-' || c == ' ') c = '_';
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

}  // namespace

std::string_view to_string(Design design) {
    switch (design) {
        case Design::FiatFull: return "FiatFull";
        case Design::FiatPartial: return "FiatPartial";
        case Design::Crypto: return "Crypto";
        case Design::Algo: return "Algo";
        case Design::Over: return "Over";
    }
    return "?";
}

std::string_view to_string(Action action) {
    switch (action) {
        case Action::Sell: return "Sell";
        case Action::Redeem: return "Redeem";
        case Action::Hold: return "Hold";
    }
    return "?";
}

std::string_view to_string(Zone zone) {
    switch (zone) {
        case Zone::UniquePeg: return "UniquePeg";
        case Zone::SelfFulfilling: return "SelfFulfilling";
        case Zone::DepegOnly: return "DepegOnly";
    }
    return "?";
}

std::optional<Design> parse_design(std::string_view text) {
    const std::string key = normalize(text);
    if (key == "fiatfull" || key == "fiat_full") return Design::FiatFull;
    if (key == "fiatpartial" || key == "fiat_partial") return Design::FiatPartial;
    if (key == "crypto") return Design::Crypto;
    if (key == "algo" || key == "algorithmic") return Design::Algo;
    if (key == "over" || key == "over_collateralized") return Design::Over;
    return std::nullopt;
}

std::optional<Zone> parse_zone(std::string_view text) {
    for (Zone z : {Zone::UniquePeg, Zone::SelfFulfilling, Zone::DepegOnly}) {
        if (text == to_string(z)) return z;
    }
    return std::nullopt;
}

FundamentalState::FundamentalState(double theta, ThetaInterval range)
    : theta_(theta), range_(range) {
    if (!(range.min < range.max)) {
        throw InvalidArgument("fundamental interval is degenerate: [" + std::to_string(range.min) +
                              ", " + std::to_string(range.max) + "]");
    }
    if (!std::isfinite(theta) || !range.contains(theta)) {
        throw InvalidArgument("theta " + std::to_string(theta) + " outside [" +
                              std::to_string(range.min) + ", " + std::to_string(range.max) + "]");
    }
}

void StablecoinSpec::validate() const {
    if (!(total_supply > 0.0) || !std::isfinite(total_supply)) {
        throw InvalidArgument("total supply must be positive");
    }
    if (fiat_reserve < 0.0) throw InvalidArgument("fiat reserve must be non-negative");
    if (design == Design::FiatFull && fiat_reserve < total_supply) {
        throw InvalidArgument("FiatFull requires fiat_reserve >= total_supply");
    }
    if (design == Design::FiatPartial && !(fiat_reserve > 0.0 && fiat_reserve < total_supply)) {
        throw InvalidArgument("FiatPartial requires 0 < fiat_reserve < total_supply");
    }
}

}  // namespace stablecoin
