#pragma once

#include <span>
#include <string>
#include <vector>

#include "fibscat/model.hpp"

namespace fibscat {

enum class WitnessKind { axis, degenerate_ring, origin };

std::string_view to_string(WitnessKind k) noexcept;

struct ThresholdWitness {
    std::vector<double> k;  // one critical momentum
    WitnessKind kind = WitnessKind::axis;
    double energy = 0.0;
};

/// theta(P): energies of critical points of k -> Omega(P - k) + omega(k).
struct ThresholdSet {
    std::vector<double> P;
    std::vector<double> energies;            // ascending, deduplicated
    std::vector<ThresholdWitness> witnesses;  // one per energy
    int scan_intervals = 0;                   // resolution at which the count stabilized
    double search_radius = 0.0;
    std::vector<std::string> warnings;
};

struct ThresholdOptions {
    /// Half-length of the scanned axis segment; <= 0 picks 2|P| + 32.
    double search_radius = 0.0;
    int initial_intervals = 4096;
    int max_doublings = 8;
    double root_tolerance = 1e-12;
    double dedupe = 1e-10;
};

ThresholdSet threshold_set(const DispersionModel& model, std::span<const double> P,
                           const ThresholdOptions& opts = {});

/// Axis reduction: with e = P/|P| (e_1 for P = 0) and k = t e,
/// g(t) = Omega'(|P| - t) - omega'(t) (odd extensions) vanishes exactly at
/// the on-axis critical points.
double axis_gradient_mismatch(const DispersionModel& model, double P_norm, double t);
double axis_energy(const DispersionModel& model, double P_norm, double t);

/// Number of roots of the axis equation found at a given scan resolution.
std::vector<double> axis_roots(const DispersionModel& model, double P_norm, double radius, int intervals,
                               double tolerance);

}  // namespace fibscat
