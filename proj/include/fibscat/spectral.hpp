#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fibscat/fiber.hpp"
#include "fibscat/grid.hpp"
#include "fibscat/model.hpp"

namespace fibscat {

enum class Provenance { secular, dense };

std::string_view to_string(Provenance p) noexcept;

/// All eigenpairs of an arrowhead fiber operator. Eigenvectors are stored
/// implicitly (secular) or as a dense matrix (dense); copies share the data.
class EigenDecomposition {
public:
    struct Impl;

    explicit EigenDecomposition(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

    std::size_t size() const noexcept;
    /// Ascending.
    std::span<const double> eigenvalues() const noexcept;
    double eigenvalue(std::size_t i) const { return eigenvalues()[i]; }
    Provenance provenance() const noexcept;
    const MomentumGrid& grid() const noexcept;

    FiberState eigenvector(std::size_t i) const;
    /// Coefficients <phi_i, psi> in eigenvalue order.
    std::vector<cplx> project(const FiberState& psi) const;
    FiberState synthesize(std::span<const cplx> coefficients) const;
    FiberState apply_function(const FiberState& psi, const std::function<cplx(double)>& f) const;
    /// exp(-i t H) psi.
    FiberState evolve(const FiberState& psi, double t) const;

    /// Number of coordinates removed by deflation (zero coupling or degenerate complement).
    std::size_t deflated_count() const noexcept;

private:
    std::shared_ptr<const Impl> impl_;
};

struct SecularOptions {
    /// |coupling_j| below this times op.scale() is treated as zero.
    double zero_coupling = 1e-15;
    /// Diagonal entries within this times op.scale() are merged.
    double degenerate = 1e-13;
};

EigenDecomposition eigendecompose(const ArrowheadFiberOperator& op, const SecularOptions& opts = {});
/// LAPACK zheevd on the assembled dense matrix (small grids, cross-checks).
EigenDecomposition eigendecompose_dense(const ArrowheadFiberOperator& op);

struct SigmaEssResult {
    double value = 0.0;
    std::vector<double> minimizer;
};

/// inf_k Omega(P - k) + omega(k), grid independent.
SigmaEssResult sigma_ess_detail(const DispersionModel& model, std::span<const double> P);
double sigma_ess(const DispersionModel& model, std::span<const double> P);

struct MassShell {
    double energy = 0.0;
    FiberState state;
};

/// The secular root below min_j diag_j, if it also lies below Sigma_ess(P).
std::optional<MassShell> mass_shell(const DispersionModel& model, const MomentumGrid& grid,
                                    std::span<const double> P);
std::optional<MassShell> mass_shell(const ArrowheadFiberOperator& op, double sigma_ess_value);

/// Weyl-sequence witness: ||(H(P) - lambda) u_n|| / ||u_n|| for
/// u_n = (0, n^(nu/2) bump(n |k - k0|)), k0 on the axis through P with
/// F_P(k0) = lambda.
double weyl_residual(const DispersionModel& model, const MomentumGrid& grid, std::span<const double> P,
                     double lambda, double n);
/// Point k0 used by weyl_residual.
std::vector<double> weyl_center(const DispersionModel& model, std::span<const double> P, double lambda);

struct AtlasEntry {
    std::vector<double> P;
    double sigma_ess = 0.0;
    std::optional<double> E0;
    std::vector<double> eigenvalues_below;
    std::vector<double> thresholds;
    bool ok = true;
    std::string error;
};

struct SpectralAtlas {
    std::vector<AtlasEntry> entries;
};

SpectralAtlas spectral_atlas(const DispersionModel& model, const MomentumGrid& grid,
                             const std::vector<std::vector<double>>& P_list);

}  // namespace fibscat
