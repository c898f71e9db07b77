#include "fibscat/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fibscat/errors.hpp"
#include "fibscat/linalg.hpp"
#include "fibscat/smooth.hpp"

namespace fibscat {

namespace {

constexpr std::size_t improved_dense_limit = 512;

double vector_norm(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

void require_same_grid(const MomentumGrid& grid, const FiberState& psi) {
    if (psi.size() != grid.size()) fail(ErrorKind::dimension, "state does not match the grid");
}

// per-point |x_j| / t
std::vector<double> scaled_radius(const MomentumGrid& grid, double t) {
    std::vector<double> r(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) r[j] = grid.position_norm(j) / t;
    return r;
}

// X_i phi = (x_i / t) phi - v_i(k) phi, field only
std::vector<cplx> apply_phase_space_x(const MomentumGrid& grid, std::span<const double> velocity, int axis,
                                      std::span<const cplx> field, double t) {
    const std::size_t m = grid.size();
    const double* v = velocity.data() + static_cast<std::size_t>(axis) * m;
    std::vector<cplx> pos(m), out(m);
    grid.to_position(field, pos);
    for (std::size_t j = 0; j < m; ++j) pos[j] *= grid.position(j, axis) / t;
    grid.to_momentum(pos, out);
    for (std::size_t j = 0; j < m; ++j) out[j] -= v[j] * field[j];
    return out;
}

std::vector<cplx> apply_position_weight(const MomentumGrid& grid, std::span<const double> weight,
                                        std::span<const cplx> field) {
    std::vector<cplx> out(field.begin(), field.end());
    multiply_position(grid, std::span<cplx>(out), [&](std::size_t j) { return weight[j]; });
    return out;
}

double banded_mass(const MomentumGrid& grid, std::span<const cplx> field, std::span<const double> band) {
    std::vector<cplx> pos(field.size());
    grid.to_position(field, pos);
    std::vector<double> terms(pos.size());
    for (std::size_t j = 0; j < pos.size(); ++j) terms[j] = band[j] * std::norm(pos[j]);
    return pairwise_sum(terms);
}

}  // namespace

void TimeSchedule::validate() const {
    if (!(t0 >= 1.0)) fail(ErrorKind::configuration, "schedule.t0 must be at least 1");
    if (!(ratio > 1.0)) fail(ErrorKind::configuration, "schedule ratio must exceed 1");
    if (count < 1) fail(ErrorKind::configuration, "schedule.count must be positive");
}

std::vector<double> TimeSchedule::times() const {
    validate();
    std::vector<double> t(static_cast<std::size_t>(count));
    for (int n = 0; n < count; ++n) t[static_cast<std::size_t>(n)] = t0 * std::pow(ratio, n);
    return t;
}

void check_boundary(const MomentumGrid& grid, const FiberState& psi, double t, const BoundaryMonitor& monitor) {
    if (!monitor.enabled) return;
    const double mass = boundary_mass(grid, psi, monitor.fraction);
    if (mass > monitor.threshold)
        fail(ErrorKind::boundary_breach, "field mass " + std::to_string(mass) + " beyond |x| > " +
                                             std::to_string(monitor.fraction) + " L at t = " + std::to_string(t));
}

FiberState propagate(const EigenDecomposition& decomp, const FiberState& psi, double t,
                     const BoundaryMonitor& monitor) {
    require_same_grid(decomp.grid(), psi);
    FiberState out = decomp.evolve(psi, t);
    check_boundary(decomp.grid(), out, t, monitor);
    return out;
}

FiberState propagate_free(const ArrowheadFiberOperator& op, const FiberState& psi, double t) {
    require_same_grid(op.grid, psi);
    FiberState out = psi;
    out.vacuum *= std::polar(1.0, -t * op.head);
    for (std::size_t j = 0; j < out.size(); ++j) out.field[j] *= std::polar(1.0, -t * op.diag[j]);
    return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(ObservableKind k) noexcept {
    switch (k) {
    case ObservableKind::large_velocity: return "large-velocity";
    case ObservableKind::phase_space: return "phase-space";
    case ObservableKind::improved_phase_space: return "improved-phase-space";
    case ObservableKind::minimal_velocity: return "minimal-velocity";
    }
    return "?";
}

ObservableKind parse_observable_kind(std::string_view name) {
    for (auto k : {ObservableKind::large_velocity, ObservableKind::phase_space, ObservableKind::improved_phase_space,
                   ObservableKind::minimal_velocity})
        if (name == to_string(k)) return k;
    fail(ErrorKind::configuration, "unknown observable '" + std::string(name) + "'");
}

PropagationObservable PropagationObservable::large_velocity(double R, double R_prime) {
    if (!(R > 0.0) || !(R_prime > R)) fail(ErrorKind::configuration, "large-velocity band needs 0 < R < R'");
    return {ObservableKind::large_velocity, R, R_prime, 0, false};
}

PropagationObservable PropagationObservable::phase_space(double c0, double c1) {
    if (!(c0 > 0.0) || !(c1 > c0)) fail(ErrorKind::configuration, "phase-space band needs 0 < c0 < c1");
    return {ObservableKind::phase_space, c0, c1, 0, false};
}

PropagationObservable PropagationObservable::improved_phase_space(double c0, double c1, int component) {
    if (!(c0 > 0.0) || !(c1 > c0)) fail(ErrorKind::configuration, "improved phase-space band needs 0 < c0 < c1");
    if (component < 0) fail(ErrorKind::configuration, "component must be nonnegative");
    return {ObservableKind::improved_phase_space, c0, c1, component, false};
}

PropagationObservable PropagationObservable::minimal_velocity(double epsilon, bool vacuum_block) {
    if (!(epsilon > 0.0)) fail(ErrorKind::configuration, "minimal-velocity epsilon must be positive");
    return {ObservableKind::minimal_velocity, 0.0, epsilon, 0, vacuum_block};
}

std::vector<double> group_velocity_field(const DispersionModel& model, const MomentumGrid& grid,
                                         std::span<const double> P) {
    const std::size_t nu = static_cast<std::size_t>(grid.nu());
    const std::size_t m = grid.size();
    std::vector<double> out(nu * m), k(nu), v(nu);
    for (std::size_t j = 0; j < m; ++j) {
        grid.momentum(j, k);
        group_velocity(model, P, k, v);
        for (std::size_t a = 0; a < nu; ++a) out[a * m + j] = v[a];
    }
    return out;
}

double observable_value(const DispersionModel& model, const ArrowheadFiberOperator& op,
                        const PropagationObservable& obs, const FiberState& psi, double t) {
    const MomentumGrid& grid = op.grid;
    require_same_grid(grid, psi);
    if (!(t > 0.0)) fail(ErrorKind::domain, "observables are evaluated at positive times");
    const auto r = scaled_radius(grid, t);
    std::vector<double> band(r.size());
    for (std::size_t j = 0; j < r.size(); ++j) band[j] = smooth_band(r[j], obs.lo, obs.hi);

    switch (obs.kind) {
    case ObservableKind::large_velocity: return banded_mass(grid, psi.field, band);
    case ObservableKind::minimal_velocity: {
        const double field = banded_mass(grid, psi.field, band);
        return field + (obs.vacuum_block ? std::norm(psi.vacuum) : 0.0);
    }
    case ObservableKind::phase_space: {
        const auto v = group_velocity_field(model, grid, op.P);
        double s = 0.0;
        for (int a = 0; a < grid.nu(); ++a) s += banded_mass(grid, apply_phase_space_x(grid, v, a, psi.field, t), band);
        return s;
    }
    case ObservableKind::improved_phase_space: {
        if (obs.component >= grid.nu()) fail(ErrorKind::configuration, "component exceeds the dimension");
        const std::size_t m = grid.size();
        if (m > improved_dense_limit)
            fail(ErrorKind::configuration, "improved phase-space observable needs a grid of at most " +
                                               std::to_string(improved_dense_limit) + " points");
        // O = J X_i + X_i J, its absolute value by dense diagonalization
        const auto v = group_velocity_field(model, grid, op.P);
        std::vector<cplx> O(m * m);
        std::vector<cplx> e(m, cplx(0.0, 0.0));
        for (std::size_t c = 0; c < m; ++c) {
            e[c] = 1.0;
            auto a = apply_position_weight(grid, band, apply_phase_space_x(grid, v, obs.component, e, t));
            const auto b = apply_phase_space_x(grid, v, obs.component, apply_position_weight(grid, band, e), t);
            e[c] = 0.0;
            for (std::size_t row = 0; row < m; ++row) O[row * m + c] = a[row] + b[row];
        }
        for (std::size_t row = 0; row < m; ++row)
            for (std::size_t c = row; c < m; ++c) {
                const cplx avg = 0.5 * (O[row * m + c] + std::conj(O[c * m + row]));
                O[row * m + c] = avg;
                O[c * m + row] = std::conj(avg);
            }
        const auto de = hermitian_eigen(std::move(O), m, true);
        std::vector<double> terms(m);
        for (std::size_t i = 0; i < m; ++i) {
            cplx c{0.0, 0.0};
            for (std::size_t row = 0; row < m; ++row) c += std::conj(de.vectors[row * m + i]) * psi.field[row];
            terms[i] = std::abs(de.values[i]) * std::norm(c);
        }
        return pairwise_sum(terms);
    }
    }
    return 0.0;
}

double tail_slope(std::span<const double> times, std::span<const double> cumulative) {
    if (times.size() != cumulative.size()) fail(ErrorKind::dimension, "times and values differ in length");
    if (times.size() < 2) return 0.0;
    const double t_end = times.back();
    const double t_start = std::max(times.front(), t_end / 10.0);
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < t_start * (1.0 - 1e-12)) continue;
        const double x = std::log(times[i]);
        sx += x;
        sy += cumulative[i];
        sxx += x * x;
        sxy += x * cumulative[i];
        ++n;
    }
    if (n < 2) return 0.0;
    const double den = n * sxx - sx * sx;
    return den > 0.0 ? (n * sxy - sx * sy) / den : 0.0;
}

MonitorCurve propagation_monitor(const DispersionModel& model, const MomentumGrid& grid, std::span<const double> P,
                                 const FiberState& psi, const PropagationObservable& obs, const TimeSchedule& schedule,
                                 const BoundaryMonitor& monitor) {
    require_same_grid(grid, psi);
    const auto op = assemble_fiber(model, grid, P);
    const auto decomp = eigendecompose(op);
    MonitorCurve curve;
    curve.times = schedule.times();
    const double dlog = std::log(schedule.ratio);
    const std::size_t n = curve.times.size();
    curve.terms.resize(n);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        const double t = curve.times[i];
        curve.terms[i] = std::numeric_limits<double>::quiet_NaN();
        try {
            curve.terms[i] = observable_value(model, op, obs, propagate(decomp, psi, t, monitor), t);
        } catch (const Error&) {
            // reported after the loop in schedule order
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (std::isnan(curve.terms[i])) {
            // recompute serially to raise the original error
            const double t = curve.times[i];
            observable_value(model, op, obs, propagate(decomp, psi, t, monitor), t);
        }
    double acc = 0.0;
    curve.cumulative.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        acc += curve.terms[i] * dlog;
        curve.cumulative[i] = acc;
    }
    curve.tail_slope = tail_slope(curve.times, curve.cumulative);
    return curve;
}

double max_group_speed(const DispersionModel& model, const ArrowheadFiberOperator& op, double e_lo, double e_hi) {
    const MomentumGrid& grid = op.grid;
    const std::size_t nu = static_cast<std::size_t>(grid.nu());
    std::vector<double> k(nu), v(nu);
    double vmax = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        if (op.diag[j] < e_lo || op.diag[j] > e_hi) continue;
        grid.momentum(j, k);
        group_velocity(model, op.P, k, v);
        vmax = std::max(vmax, vector_norm(v));
    }
    return vmax;
}

// ---------------------------------------------------------------------------

bool increments_growing(std::span<const double> increments, double floor) {
    const std::size_t n = increments.size();
    if (n < 3) return false;
    const double a = increments[n - 3], b = increments[n - 2], c = increments[n - 1];
    if (c <= floor) return false;
    return a < b && b < c;
}

AsymptoticProjection asymptotic_projection(const DispersionModel& model, const MomentumGrid& grid,
                                           std::span<const double> P, const FiberState& psi,
                                           std::vector<double> deltas, const TimeSchedule& schedule,
                                           double delta_tolerance, const BoundaryMonitor& monitor) {
    require_same_grid(grid, psi);
    if (deltas.empty()) fail(ErrorKind::configuration, "delta schedule is empty");
    for (double d : deltas)
        if (!(d > 0.0)) fail(ErrorKind::configuration, "delta values must be positive");
    std::sort(deltas.begin(), deltas.end(), std::greater<>());
    const auto op = assemble_fiber(model, grid, P);
    const auto decomp = eigendecompose(op);

    AsymptoticProjection out;
    out.deltas = deltas;
    out.times = schedule.times();
    const std::size_t nd = deltas.size(), nt = out.times.size();
    out.values.assign(nd, std::vector<double>(nt, 0.0));
    for (std::size_t i = 0; i < nt; ++i) {
        const double t = out.times[i];
        const FiberState psi_t = propagate(decomp, psi, t, monitor);
        std::vector<cplx> pos(grid.size());
        grid.to_position(psi_t.field, pos);
        std::vector<double> terms(pos.size());
        for (std::size_t d = 0; d < nd; ++d) {
            for (std::size_t j = 0; j < pos.size(); ++j)
                terms[j] = escape_profile(grid.position_norm(j) / t, deltas[d]) * std::norm(pos[j]);
            out.values[d][i] = pairwise_sum(terms);
        }
    }
    out.increments.resize(nd);
    out.cauchy.resize(nd);
    bool all_cauchy = true;
    for (std::size_t d = 0; d < nd; ++d) {
        for (std::size_t i = 1; i < nt; ++i)
            out.increments[d].push_back(std::abs(out.values[d][i] - out.values[d][i - 1]));
        out.cauchy[d] = !increments_growing(out.increments[d]);
        all_cauchy = all_cauchy && out.cauchy[d];
    }
    out.delta_gap = nd >= 2 ? std::abs(out.values[nd - 1][nt - 1] - out.values[nd - 2][nt - 1]) : 0.0;
    if (all_cauchy) {
        out.extrapolated = out.values[nd - 1][nt - 1];
        out.converged = out.delta_gap <= delta_tolerance;
    } else {
        out.extrapolated = std::numeric_limits<double>::quiet_NaN();
        out.converged = false;
    }
    return out;
}

WaveOperatorResult wave_operator(const DispersionModel& model, const MomentumGrid& grid, std::span<const double> P,
                                 const FiberState& u, const TimeSchedule& schedule, double tolerance,
                                 const BoundaryMonitor& monitor) {
    require_same_grid(grid, u);
    if (u.vacuum != cplx(0.0, 0.0))
        fail(ErrorKind::domain, "wave operator input must have zero vacuum component");
    const auto op = assemble_fiber(model, grid, P);
    const auto decomp = eigendecompose(op);
    WaveOperatorResult out;
    out.times = schedule.times();
    const double un = u.norm();
    FiberState previous;
    for (std::size_t i = 0; i < out.times.size(); ++i) {
        const double T = out.times[i];
        const FiberState free_T = propagate_free(op, u, T);
        check_boundary(grid, free_T, T, monitor);
        FiberState w = decomp.evolve(free_T, -T);
        out.isometry_defects.push_back(std::abs(w.norm() - un));
        if (i > 0) out.increments.push_back((w - previous).norm());
        previous = std::move(w);
    }
    out.image = previous;
    out.converged = out.increments.empty() || out.increments.back() <= tolerance;

    // H W u against W H0 u at the last time
    const double T = out.times.back();
    FiberState h0u = u;
    for (std::size_t j = 0; j < h0u.size(); ++j) h0u.field[j] *= op.diag[j];
    const double h0n = h0u.norm();
    FiberState lhs = apply_fiber(op, out.image);
    lhs -= decomp.evolve(propagate_free(op, h0u, T), -T);
    out.intertwining = h0n > 0.0 ? lhs.norm() / h0n : lhs.norm();
    return out;
}

AcDefectResult ac_defect(const DispersionModel& model, const MomentumGrid& grid, std::span<const double> P,
                         const FiberState& psi, const AcDefectParams& params) {
    require_same_grid(grid, psi);
    if (!(params.delta > 0.0)) fail(ErrorKind::configuration, "delta must be positive");
    const auto op = assemble_fiber(model, grid, P);
    const auto decomp = eigendecompose(op);
    AcDefectResult out;
    out.norm2 = psi.norm2();
    if (auto shell = mass_shell(op, sigma_ess(model, P))) {
        out.has_shell = true;
        out.bound_part = std::norm(inner(shell->state, psi));
    }

    // (W+)^* psi as the limit of exp(iTH0) [p_delta(x/T)] exp(-iTH) psi
    out.times = params.schedule.times();
    FiberState previous;
    for (std::size_t i = 0; i < out.times.size(); ++i) {
        const double T = out.times[i];
        const FiberState psi_T = propagate(decomp, psi, T, params.monitor);
        FiberState v(0.0, psi_T.field);
        multiply_position(grid, std::span<cplx>(v.field),
                          [&](std::size_t j) { return escape_profile(grid.position_norm(j) / T, params.delta); });
        out.free_curve.push_back(v.norm2());
        v = propagate_free(op, v, -T);
        if (i > 0) out.increments.push_back((v - previous).norm());
        previous = std::move(v);
    }
    out.free_part = out.free_curve.back();
    // the vectors must be Cauchy and the norm entering the defect must have settled
    const std::size_t nc = out.free_curve.size();
    const double settle = nc > 1 ? std::abs(out.free_curve[nc - 1] - out.free_curve[nc - 2]) : 0.0;
    out.converged = !increments_growing(out.increments) && settle <= params.cauchy_tolerance;
    out.defect = out.norm2 - out.bound_part - out.free_part;
    return out;
}

GeometricResidual geometric_identity_check(const DispersionModel& model, const MomentumGrid& grid,
                                           std::span<const double> P, const FiberState& psi, double delta, double T,
                                           const BoundaryMonitor& monitor) {
    require_same_grid(grid, psi);
    if (!(delta > 0.0) || !(T > 0.0)) fail(ErrorKind::configuration, "delta and T must be positive");
    const auto op = assemble_fiber(model, grid, P);
    const auto decomp = eigendecompose(op);
    auto bracket = [&](FiberState s) {
        s.vacuum = 0.0;
        multiply_position(grid, std::span<cplx>(s.field),
                          [&](std::size_t j) { return escape_profile(grid.position_norm(j) / T, delta); });
        return s;
    };
    // W_2T = exp(2iTH) exp(-2iTH0)
    auto wave = [&](const FiberState& s) {
        const FiberState f = propagate_free(op, s, 2.0 * T);
        check_boundary(grid, f, 2.0 * T, monitor);
        return decomp.evolve(f, -2.0 * T);
    };
    // P_T(H) = exp(iTH) [p] exp(-iTH)
    auto observable_H = [&](const FiberState& s) {
        return decomp.evolve(bracket(propagate(decomp, s, T, monitor)), -T);
    };
    auto observable_H0 = [&](const FiberState& s) {
        const FiberState f = propagate_free(op, s, T);
        check_boundary(grid, f, T, monitor);
        return propagate_free(op, bracket(f), -T);
    };
    // P_T(H, H0) = exp(iTH0) [p] exp(-iTH)
    auto observable_mixed = [&](const FiberState& s) {
        return propagate_free(op, bracket(propagate(decomp, s, T, monitor)), -T);
    };

    GeometricResidual out;
    const FiberState u(0.0, psi.field);
    out.range = (observable_H(wave(u)) - wave(observable_H0(u))).norm();
    out.adjoint = (observable_H(psi) - wave(observable_mixed(psi))).norm();
    return out;
}

// ---------------------------------------------------------------------------

double FiberBundle::norm2() const {
    if (weights.size() != states.size()) fail(ErrorKind::dimension, "bundle weights and states differ in length");
    std::vector<double> terms(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) terms[i] = weights[i] * states[i].norm2();
    return pairwise_sum(terms);
}

FiberBundle direct_integral_evolve(const DispersionModel& model, const MomentumGrid& grid, const FiberBundle& bundle,
                                   double t, const BoundaryMonitor& monitor) {
    const std::size_t n = bundle.states.size();
    if (bundle.P.size() != n || bundle.weights.size() != n)
        fail(ErrorKind::dimension, "bundle momenta, weights and states differ in length");
    FiberBundle out{bundle.P, bundle.weights, std::vector<FiberState>(n)};
    std::vector<std::string> errors(n);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        try {
            require_same_grid(grid, bundle.states[i]);
            const auto op = assemble_fiber(model, grid, bundle.P[i]);
            out.states[i] = propagate(eigendecompose(op), bundle.states[i], t, monitor);
        } catch (const Error& err) {
            errors[i] = err.what();
        }
    }
    std::string msg;
    int failures = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (!errors[i].empty()) {
            if (failures++ < 4) msg += "\n  fiber " + std::to_string(i) + ": " + errors[i];
        }
    if (failures > 0) fail(ErrorKind::numerical, std::to_string(failures) + " fiber(s) failed:" + msg);
    return out;
}

}  // namespace fibscat
