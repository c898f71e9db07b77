#pragma once

#include <cfloat>
#include <cmath>

namespace fibscat::detail {

// Root of an increasing function g on (0, h] with g(0+) < 0 (possibly -inf)
// and g(h) >= 0: logarithmic bisection down to a factor 4, then plain
// bisection to the last representable bit.
template <class G>
double bisect_positive(double h, G&& g) {
    double hi = h;
    double lo = h * 0x1p-900;
    if (lo == 0.0) lo = DBL_TRUE_MIN;
    double glo = g(lo);
    if (glo >= 0.0) return lo;
    double ghi = g(hi);
    if (ghi <= 0.0) return hi;
    while (hi / lo > 4.0) {
        const double mid = std::sqrt(lo) * std::sqrt(hi);
        const double gm = g(mid);
        if (gm < 0.0) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
            ghi = gm;
        }
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        const double gm = g(mid);
        if (gm < 0.0) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
            ghi = gm;
        }
    }
    return (-glo < ghi) ? lo : hi;
}

}  // namespace fibscat::detail
