#pragma once

#include <cmath>
#include <optional>

namespace stablecoin {

struct BisectionOptions {
    double value_tolerance = 1e-12;  // stop once |f(x)| <= this
    double x_tolerance = 1e-15;      // or once the bracket is this narrow
    int max_iterations = 200;
};

/// Root of a monotone function on [lo, hi] by bisection.
///
/// Requires f(lo) and f(hi) to have opposite signs (or one of them to be
/// zero); returns nullopt otherwise. The result is the bracket end with the
/// smaller |f|, so callers can check the defining equation directly.
template <class F>
std::optional<double> bisect(F&& f, double lo, double hi, const BisectionOptions& opt = {}) {
    double f_lo = f(lo);
    double f_hi = f(hi);
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    if (std::signbit(f_lo) == std::signbit(f_hi)) return std::nullopt;

    for (int it = 0; it < opt.max_iterations; ++it) {
        const double mid = lo + 0.5 * (hi - lo);
        const double f_mid = f(mid);
        if (f_mid == 0.0 || std::abs(f_mid) <= opt.value_tolerance) return mid;
        if (std::signbit(f_mid) == std::signbit(f_lo)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
        if (hi - lo <= opt.x_tolerance) break;
    }
    return std::abs(f_lo) <= std::abs(f_hi) ? lo : hi;
}

}  // namespace stablecoin
