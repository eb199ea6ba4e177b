#pragma once

#include <algorithm>
#include <cmath>

#include "acam/common.hpp"

namespace acam {

/// Bracketing root finder for monotone 1-D functions: bisection with a
/// secant step whenever the secant estimate falls inside the bracket.
/// Converges to |hi - lo| < tol_x. The function need not be monotone, but
/// f(lo) and f(hi) must differ in sign (zero endpoints are accepted).
template <class F>
double solve_bracketed(F&& f, double lo, double hi, double tol_x,
                       int max_iter = 200) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw ConvergenceError("solve_bracketed: endpoints do not bracket a root");

    bool last_was_bisect = false;
    for (int it = 0; it < max_iter; ++it) {
        if (hi - lo < tol_x) break;
        double x;
        // Alternate secant with plain bisection so a flat side cannot stall.
        if (!last_was_bisect && std::abs(fhi - flo) > 0.0) {
            x = lo - flo * (hi - lo) / (fhi - flo);
            const double guard = 0.01 * (hi - lo);
            if (!(x > lo + guard && x < hi - guard)) {
                x = 0.5 * (lo + hi);
                last_was_bisect = true;
            } else {
                last_was_bisect = false;
            }
        } else {
            x = 0.5 * (lo + hi);
            last_was_bisect = false;
        }
        const double fx = f(x);
        if (fx == 0.0) return x;
        if ((fx > 0.0) == (flo > 0.0)) {
            lo = x;
            flo = fx;
        } else {
            hi = x;
            fhi = fx;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace acam
