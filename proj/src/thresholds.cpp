#include "fibscat/thresholds.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "fibscat/errors.hpp"

namespace fibscat {

std::string_view to_string(WitnessKind k) noexcept {
    switch (k) {
    case WitnessKind::axis: return "axis";
    case WitnessKind::degenerate_ring: return "degenerate-ring";
    case WitnessKind::origin: return "origin";
    }
    return "?";
}

double axis_gradient_mismatch(const DispersionModel& model, double P_norm, double t) {
    return model.matter().axial_d1(P_norm - t) - model.field().axial_d1(t);
}

double axis_energy(const DispersionModel& model, double P_norm, double t) {
    return model.matter().radial(std::abs(P_norm - t)) + model.field().radial(std::abs(t));
}

std::vector<double> axis_roots(const DispersionModel& model, double P_norm, double radius, int intervals,
                               double tolerance) {
    auto g = [&](double t) { return axis_gradient_mismatch(model, P_norm, t); };
    const std::size_t n = static_cast<std::size_t>(intervals);
    std::vector<double> t(n + 1), v(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        t[i] = -radius + 2.0 * radius * static_cast<double>(i) / static_cast<double>(n);
        v[i] = g(t[i]);
    }
    std::vector<double> roots;
    for (std::size_t i = 0; i <= n; ++i) {
        if (v[i] == 0.0) {
            if (i == 0 || v[i - 1] != 0.0) roots.push_back(t[i]);
            continue;
        }
        if (i < n && v[i + 1] != 0.0 && (v[i] < 0.0) != (v[i + 1] < 0.0)) {
            boost::uintmax_t iters = 200;
            const auto bracket = boost::math::tools::toms748_solve(g, t[i], t[i + 1], v[i], v[i + 1],
                                                                   boost::math::tools::eps_tolerance<double>(52),
                                                                   iters);
            const double r = std::abs(g(bracket.first)) <= std::abs(g(bracket.second)) ? bracket.first : bracket.second;
            roots.push_back(r);
            continue;
        }
        // tangential zero: a local minimum of |g| without a sign change
        if (i > 0 && i < n && std::abs(v[i]) < std::abs(v[i - 1]) && std::abs(v[i]) <= std::abs(v[i + 1]) &&
            (v[i - 1] < 0.0) == (v[i] < 0.0) && (v[i + 1] < 0.0) == (v[i] < 0.0)) {
            boost::uintmax_t iters = 200;
            const auto best = boost::math::tools::brent_find_minima([&](double s) { return std::abs(g(s)); }, t[i - 1],
                                                                    t[i + 1], 52, iters);
            if (best.second <= tolerance) roots.push_back(best.first);
        }
    }
    return roots;
}

ThresholdSet threshold_set(const DispersionModel& model, std::span<const double> P, const ThresholdOptions& opts) {
    const int nu = model.nu();
    if (P.size() != static_cast<std::size_t>(nu)) fail(ErrorKind::dimension, "P has wrong dimension");
    double pn = 0.0;
    for (double p : P) pn += p * p;
    pn = std::sqrt(pn);
    std::vector<double> e(static_cast<std::size_t>(nu), 0.0);
    if (pn > 0.0)
        for (int a = 0; a < nu; ++a) e[static_cast<std::size_t>(a)] = P[static_cast<std::size_t>(a)] / pn;
    else
        e[0] = 1.0;

    ThresholdSet out;
    out.P.assign(P.begin(), P.end());
    const double radius = opts.search_radius > 0.0 ? opts.search_radius : 2.0 * pn + 32.0;
    out.search_radius = radius;

    struct Candidate {
        double energy;
        double t;
        WitnessKind kind;
    };
    std::vector<Candidate> found;

    const bool matter_flat = model.matter().flat();
    const bool field_flat = model.field().flat();
    if (matter_flat && field_flat) {
        // every k is critical; the energy is constant
        found.push_back({model.matter().level + model.field().level, 0.5 * pn, WitnessKind::degenerate_ring});
        out.scan_intervals = 0;
    } else {
        // Off-axis critical points need omega'(|k|) = 0 and Omega'(|P-k|) = 0
        // with both radii positive; for the shipped families a zero radius
        // other than 0 exists only for a flat family, so with at most one
        // flat family every critical point lies on the axis.
        std::vector<double> roots;
        std::vector<std::size_t> counts;
        int intervals = opts.initial_intervals;
        bool stable = false;
        for (int d = 0; d <= opts.max_doublings; ++d, intervals *= 2) {
            roots = axis_roots(model, pn, radius, intervals, opts.root_tolerance);
            counts.push_back(roots.size());
            const std::size_t c = counts.size();
            if (c >= 3 && counts[c - 1] == counts[c - 2] && counts[c - 2] == counts[c - 3]) {
                stable = true;
                out.scan_intervals = intervals / 4;
                break;
            }
        }
        if (!stable) {
            std::string msg = "threshold root count did not stabilize; counts:";
            for (auto c : counts) msg += " " + std::to_string(c);
            fail(ErrorKind::numerical, msg);
        }
        for (double t : roots) {
            if (std::abs(t) <= 1e-12) t = 0.0;
            const WitnessKind kind = t == 0.0 ? WitnessKind::origin : WitnessKind::axis;
            found.push_back({axis_energy(model, pn, t), t, kind});
        }
        // roots may sit beyond the scanned segment if the mismatch nearly
        // vanishes at its ends
        double gmax = 0.0;
        for (int i = 0; i <= 64; ++i)
            gmax = std::max(gmax, std::abs(axis_gradient_mismatch(model, pn, -radius + 2.0 * radius * i / 64.0)));
        for (double end : {-radius, radius})
            if (std::abs(axis_gradient_mismatch(model, pn, end)) < 1e-3 * gmax)
                out.warnings.push_back("gradient mismatch nearly vanishes at t = " + std::to_string(end) +
                                       "; search_radius may be too small");
    }

    std::sort(found.begin(), found.end(), [](const Candidate& a, const Candidate& b) { return a.energy < b.energy; });
    for (const auto& c : found) {
        if (!out.energies.empty() && std::abs(c.energy - out.energies.back()) <= opts.dedupe * std::max(1.0, std::abs(c.energy)))
            continue;
        out.energies.push_back(c.energy);
        ThresholdWitness w;
        w.kind = c.kind;
        w.energy = c.energy;
        w.k.resize(e.size());
        for (std::size_t a = 0; a < e.size(); ++a) w.k[a] = c.t * e[a];
        out.witnesses.push_back(std::move(w));
    }
    return out;
}

}  // namespace fibscat
