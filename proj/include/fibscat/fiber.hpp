#pragma once

#include <span>
#include <vector>

#include "fibscat/grid.hpp"
#include "fibscat/model.hpp"
#include "fibscat/smooth.hpp"

namespace fibscat {

/// Discretized H(P) = [[head, coupling^*], [coupling, diag]] on C + grid.
struct ArrowheadFiberOperator {
    MomentumGrid grid;
    std::vector<double> P;
    double head = 0.0;
    std::vector<double> diag;      // F_P(k_j) = omega(k_j) + Omega(P - k_j)
    std::vector<cplx> coupling;    // sqrt(w) rho_hat(k_j)

    std::size_t dim() const noexcept { return diag.size() + 1; }
    /// Cheap upper bound on the operator norm, used to scale tolerances.
    double scale() const noexcept;
    /// Row-major (dim x dim) dense matrix, index 0 is the vacuum.
    std::vector<cplx> dense() const;
};

/// H(P) direct sum F_P(D_x) acting on the extra free-particle copy.
struct ExtendedFiberOperator {
    ArrowheadFiberOperator inner;
    std::vector<double> free_block;
};

struct AssembleOptions {
    /// Reject grids where the momentum tail of rho_hat outside the cutoff
    /// carries more than this fraction of ||rho||^2.
    double tail_tolerance = 1e-10;
    bool check_tail = true;
};

ArrowheadFiberOperator assemble_fiber(const DispersionModel& model, const MomentumGrid& grid,
                                      std::span<const double> P, const AssembleOptions& opts = {});
ExtendedFiberOperator extend_fiber(const ArrowheadFiberOperator& op);

FiberState apply_fiber(const ArrowheadFiberOperator& op, const FiberState& psi);
/// <psi, H psi>.
cplx fiber_expectation(const ArrowheadFiberOperator& op, const FiberState& psi);

struct PartitionSplit {
    FiberState inner;
    std::vector<cplx> outer;  // j_inf(x/R) psi.field, momentum representation
};

PartitionSplit partition_split(const MomentumGrid& grid, const FiberState& psi, double R);

struct LocalizationOptions {
    int max_iterations = 60;
    double relative_tolerance = 1e-6;
    unsigned seed = 12345;
};

/// Operator norm of j^R f(H(P)) - f(H^ext(P)) j^R, estimated by power iteration.
double localization_error(const DispersionModel& model, const MomentumGrid& grid, std::span<const double> P,
                          const EnergyWindow& f, double R, const LocalizationOptions& opts = {});

}  // namespace fibscat
