#pragma once

#include <span>
#include <string>
#include <vector>

#include "fibscat/fiber.hpp"
#include "fibscat/grid.hpp"
#include "fibscat/model.hpp"

namespace fibscat {

/// A = [a_{P0}], a = (v.x + x.v)/2 with v(k) = grad omega(k) - grad Omega(P0 - k),
/// V diagonal in momentum and X diagonal in position. Matrix-free.
class ConjugateOperator {
public:
    ConjugateOperator(const DispersionModel& model, const MomentumGrid& grid, std::span<const double> P0);

    const MomentumGrid& grid() const noexcept { return grid_; }
    std::span<const double> P0() const noexcept { return P0_; }
    /// v_a(k_j), stored axis-major.
    double velocity(int axis, std::size_t j) const noexcept { return velocity_[static_cast<std::size_t>(axis) * size_ + j]; }

    /// A on a field array (the vacuum row and column of A vanish).
    std::vector<cplx> apply_field(std::span<const cplx> field) const;
    FiberState apply(const FiberState& psi) const;
    /// Row-major (M+1)^2 dense matrix; O(M^2 log M), meant for small grids.
    std::vector<cplx> dense() const;
    /// sum_a max|v_a| * L/2, an upper bound for ||A||.
    double norm_bound() const noexcept;

private:
    MomentumGrid grid_;
    std::vector<double> P0_;
    std::size_t size_;
    std::vector<double> velocity_;
    std::vector<double> positions_;  // x_a(x_j), axis-major
};

ConjugateOperator assemble_conjugate(const DispersionModel& model, const MomentumGrid& grid, std::span<const double> P0);

/// Closed form of [H(P), i A_{P0}]: diagonal v_{P0}(k) . grad_k F_P(k) on the
/// field and the off-diagonal column -i A c, c the coupling.
struct CommutatorMatrix {
    std::vector<double> diag;
    std::vector<cplx> column;
    /// max over probe states of ||(closed - direct) psi|| / ||psi||
    double discrepancy = 0.0;
    double scale = 0.0;
    bool verified = false;

    FiberState apply(const FiberState& psi) const;
    std::vector<cplx> dense() const;
};

struct CommutatorOptions {
    bool verify = true;
    double tolerance = 1e-8;  // relative to scale
};

/// i (H A - A H) psi computed directly from the discrete operators.
FiberState direct_commutator(const ArrowheadFiberOperator& op, const ConjugateOperator& A, const FiberState& psi);

/// Smooth, well-localized wavepackets on which the closed form and the
/// direct commutator must agree; empty if the grid is too coarse.
std::vector<FiberState> commutator_probes(const MomentumGrid& grid);

CommutatorMatrix assemble_commutator(const DispersionModel& model, const MomentumGrid& grid, std::span<const double> P,
                                     std::span<const double> P0, const CommutatorOptions& opts = {});

struct MourreResult {
    double c_est = 0.0;
    int n_window = 0;
    bool threshold_in_window = false;
    double discrepancy = 0.0;
    std::vector<std::string> warnings;
};

/// Smallest eigenvalue of the commutator compressed to the eigenvectors of
/// H(P) with eigenvalue in [lambda - kappa, lambda + kappa] and not below
/// Sigma_ess(P).
MourreResult mourre_constant(const DispersionModel& model, const MomentumGrid& grid, std::span<const double> P,
                             std::span<const double> P0, double lambda, double kappa);

struct VirialResult {
    bool has_shell = false;
    double value = 0.0;  // <psi_E, [H, iA] psi_E>
    double scale = 0.0;
};

VirialResult virial_check(const DispersionModel& model, const MomentumGrid& grid, std::span<const double> P,
                          std::span<const double> P0);

}  // namespace fibscat
