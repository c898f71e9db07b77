#pragma once

// Fixed smooth cutoff functions shared by the partition of unity, the
// asymptotic observable and the propagation observables.

#include <cmath>
#include <limits>
#include <numbers>

namespace fibscat {

/// Quintic smoothstep: 0 for s <= 0, 1 for s >= 1, C^2 in between.
inline double smoothstep(double s) noexcept {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    return s * s * s * (s * (6.0 * s - 15.0) + 10.0);
}

/// Inner partition function j0(r): 1 for r <= 1, 0 for r >= 2.
/// j0 = cos(pi/2 S(r-1)), j_inf = sin(pi/2 S(r-1)) so that j0^2 + j_inf^2 = 1.
inline double partition_inner(double r) noexcept {
    return std::cos(0.5 * std::numbers::pi * smoothstep(r - 1.0));
}

inline double partition_outer(double r) noexcept {
    return std::sin(0.5 * std::numbers::pi * smoothstep(r - 1.0));
}

/// Asymptotic-observable profile p(r): 0 for r <= 1/2, 1 for r >= 1, nondecreasing.
inline double escape_profile(double r) noexcept { return smoothstep(2.0 * r - 1.0); }

/// p_delta(r) = p(r / delta).
inline double escape_profile(double r, double delta) noexcept { return escape_profile(r / delta); }

/// Mollified indicator of [lo, hi] (hi may be +inf). The ramps sit inside the
/// interval and are 10% of its width (10% of lo for half-lines); a lower edge
/// at 0 has no ramp.
inline double smooth_band(double s, double lo, double hi) noexcept {
    if (s < lo || s > hi) return 0.0;
    const double width = std::isfinite(hi) ? hi - lo : lo;
    const double edge = 0.1 * width;
    if (edge <= 0.0) return 1.0;
    double value = 1.0;
    if (lo > 0.0) value *= smoothstep((s - lo) / edge);
    if (std::isfinite(hi)) value *= smoothstep((hi - s) / edge);
    return value;
}

/// Smooth compactly supported energy window: 1 on |E - center| <= half_width,
/// falling to 0 at |E - center| >= half_width + edge.
struct EnergyWindow {
    double center = 0.0;
    double half_width = 0.5;
    double edge = 0.25;

    double operator()(double energy) const noexcept {
        const double d = std::abs(energy - center) - half_width;
        if (d <= 0.0) return 1.0;
        if (edge <= 0.0) return 0.0;
        return 1.0 - smoothstep(d / edge);
    }

    double support_min() const noexcept { return center - half_width - edge; }
    double support_max() const noexcept { return center + half_width + edge; }
};

/// C-infinity bump exp(1 - 1/(1 - s^2)) on |s| < 1, equal to 1 at s = 0.
inline double bump(double s) noexcept {
    const double q = 1.0 - s * s;
    if (q <= 0.0) return 0.0;
    return std::exp(1.0 - 1.0 / q);
}

}  // namespace fibscat
