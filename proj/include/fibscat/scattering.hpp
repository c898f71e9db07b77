#pragma once

#include <span>
#include <string>
#include <vector>

#include "fibscat/fiber.hpp"
#include "fibscat/grid.hpp"
#include "fibscat/model.hpp"
#include "fibscat/spectral.hpp"

namespace fibscat {

/// Geometric evaluation times t_n = t0 * ratio^n, n = 0 .. count-1.
struct TimeSchedule {
    double t0 = 1.0;
    double ratio = 1.25;
    int count = 20;

    void validate() const;
    std::vector<double> times() const;
};

/// Aborts a run once the field mass in |x| > fraction * L exceeds threshold.
struct BoundaryMonitor {
    bool enabled = true;
    double fraction = 0.25;
    double threshold = 1e-3;
};

void check_boundary(const MomentumGrid& grid, const FiberState& psi, double t, const BoundaryMonitor& monitor);

/// exp(-i t H(P)) psi from the decomposition, with the boundary monitor.
FiberState propagate(const EigenDecomposition& decomp, const FiberState& psi, double t,
                     const BoundaryMonitor& monitor = {});
/// exp(-i t H0(P)) psi, H0 = diag(Omega(P), F_P).
FiberState propagate_free(const ArrowheadFiberOperator& op, const FiberState& psi, double t);

enum class ObservableKind { large_velocity, phase_space, improved_phase_space, minimal_velocity };

std::string_view to_string(ObservableKind k) noexcept;
ObservableKind parse_observable_kind(std::string_view name);

/// Propagation-estimate observables at time t; smooth bands replace the
/// sharp indicators (10% ramps inside the interval).
struct PropagationObservable {
    ObservableKind kind = ObservableKind::large_velocity;
    double lo = 0.0;  // R, c0, J support start
    double hi = 0.0;  // R', c1, J support end, epsilon
    int component = 0;
    bool vacuum_block = true;  // minimal velocity: keep the identity on the vacuum

    static PropagationObservable large_velocity(double R, double R_prime);
    static PropagationObservable phase_space(double c0, double c1);
    static PropagationObservable improved_phase_space(double c0, double c1, int component);
    static PropagationObservable minimal_velocity(double epsilon, bool vacuum_block = true);
};

/// ||B(t)^(1/2) psi||^2 for the observable B(t) at time t.
double observable_value(const DispersionModel& model, const ArrowheadFiberOperator& op,
                        const PropagationObservable& obs, const FiberState& psi, double t);

struct MonitorCurve {
    std::vector<double> times;
    std::vector<double> terms;
    std::vector<double> cumulative;  // I(T_n) = sum_{t <= T_n} term * dlog t
    /// least-squares slope of I against log T over the last decade of T
    double tail_slope = 0.0;
};

double tail_slope(std::span<const double> times, std::span<const double> cumulative);

MonitorCurve propagation_monitor(const DispersionModel& model, const MomentumGrid& grid, std::span<const double> P,
                                 const FiberState& psi, const PropagationObservable& obs, const TimeSchedule& schedule,
                                 const BoundaryMonitor& monitor = {});

/// Largest |grad_k F_P(k)| over grid points with F_P(k) in [e_lo, e_hi].
double max_group_speed(const DispersionModel& model, const ArrowheadFiberOperator& op, double e_lo, double e_hi);

/// grad_k F_P(k_j) for every grid point, axis-major (nu x M).
std::vector<double> group_velocity_field(const DispersionModel& model, const MomentumGrid& grid,
                                         std::span<const double> P);

struct AsymptoticProjection {
    std::vector<double> deltas;
    std::vector<double> times;
    std::vector<std::vector<double>> values;      // [delta][t]: <psi_t, [p_delta(x/t)] psi_t>
    std::vector<std::vector<double>> increments;  // [delta][n]: |value(t_{n+1}) - value(t_n)|
    std::vector<bool> cauchy;                     // per delta
    bool converged = false;
    double extrapolated = 0.0;  // value at the smallest delta and the last time
    double delta_gap = 0.0;     // difference between the two smallest deltas
};

AsymptoticProjection asymptotic_projection(const DispersionModel& model, const MomentumGrid& grid,
                                           std::span<const double> P, const FiberState& psi,
                                           std::vector<double> deltas, const TimeSchedule& schedule,
                                           double delta_tolerance = 1e-2, const BoundaryMonitor& monitor = {});

/// True when the last three increments grow while still above `floor`.
bool increments_growing(std::span<const double> increments, double floor = 1e-12);

struct WaveOperatorResult {
    FiberState image;
    std::vector<double> times;
    std::vector<double> increments;  // ||W_{T_{n+1}} u - W_{T_n} u||
    std::vector<double> isometry_defects;
    double intertwining = 0.0;  // ||H W u - W H0 u|| / ||H0 u|| at the last time
    bool converged = false;
};

WaveOperatorResult wave_operator(const DispersionModel& model, const MomentumGrid& grid, std::span<const double> P,
                                 const FiberState& u, const TimeSchedule& schedule, double tolerance = 1e-6,
                                 const BoundaryMonitor& monitor = {});

struct AcDefectParams {
    double delta = 0.05;
    TimeSchedule schedule{25.0, 2.0, 5};
    /// bound on the last change of ||[p_delta(x/T)] psi_T||^2
    double cauchy_tolerance = 1e-3;
    BoundaryMonitor monitor{};
};

struct AcDefectResult {
    double defect = 0.0;
    double norm2 = 0.0;
    double bound_part = 0.0;  // |<phi_E, psi>|^2
    double free_part = 0.0;   // ||(W+)^* psi||^2 at the last time
    bool has_shell = false;
    std::vector<double> times;
    std::vector<double> free_curve;
    std::vector<double> increments;
    bool converged = false;
};

AcDefectResult ac_defect(const DispersionModel& model, const MomentumGrid& grid, std::span<const double> P,
                         const FiberState& psi, const AcDefectParams& params = {});

struct GeometricResidual {
    double range = 0.0;    // ||P_T(H) W_2T u - W_2T P_T(H0) u||,  u = (0, psi.field)
    double adjoint = 0.0;  // ||P_T(H) psi - W_2T P_T(H, H0) psi||
};

GeometricResidual geometric_identity_check(const DispersionModel& model, const MomentumGrid& grid,
                                           std::span<const double> P, const FiberState& psi, double delta, double T,
                                           const BoundaryMonitor& monitor = {});

/// A sampled direct integral: fibers at momenta P with quadrature weights.
struct FiberBundle {
    std::vector<std::vector<double>> P;
    std::vector<double> weights;
    std::vector<FiberState> states;

    double norm2() const;
};

FiberBundle direct_integral_evolve(const DispersionModel& model, const MomentumGrid& grid, const FiberBundle& bundle,
                                   double t, const BoundaryMonitor& monitor = {});

}  // namespace fibscat
