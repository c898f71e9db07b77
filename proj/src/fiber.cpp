#include "fibscat/fiber.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fibscat/errors.hpp"

namespace fibscat {

double ArrowheadFiberOperator::scale() const noexcept {
    double s = std::abs(head);
    for (double d : diag) s = std::max(s, std::abs(d));
    return s + std::sqrt(norm2(coupling));
}

std::vector<cplx> ArrowheadFiberOperator::dense() const {
    const std::size_t n = dim();
    std::vector<cplx> m(n * n, cplx(0.0, 0.0));
    m[0] = head;
    for (std::size_t j = 0; j < diag.size(); ++j) {
        m[j + 1] = std::conj(coupling[j]);
        m[(j + 1) * n] = coupling[j];
        m[(j + 1) * n + j + 1] = diag[j];
    }
    return m;
}

ArrowheadFiberOperator assemble_fiber(const DispersionModel& model, const MomentumGrid& grid,
                                      std::span<const double> P, const AssembleOptions& opts) {
    if (P.size() != static_cast<std::size_t>(model.nu()) || grid.nu() != model.nu())
        fail(ErrorKind::dimension, "model, grid and P disagree on the dimension");
    if (opts.check_tail && model.coupling().g != 0.0) {
        const double total = model.rho_norm2();
        const double tail = model.rho_mom_tail_mass(grid.k_max());
        if (!(tail <= opts.tail_tolerance * total))
            fail(ErrorKind::configuration, "grid.kmax = " + std::to_string(grid.k_max()) +
                                               " truncates rho_hat (tail mass fraction " +
                                               std::to_string(tail / total) + ")");
    }
    if (model.coupling().g != 0.0 && !model.rho_mom_available())
        fail(ErrorKind::configuration, "coupling family has no momentum representation in this dimension");

    ArrowheadFiberOperator op{grid, std::vector<double>(P.begin(), P.end()), model.Omega(P), {}, {}};
    const std::size_t m = grid.size();
    op.diag.resize(m);
    op.coupling.resize(m);
    const double sw = std::sqrt(grid.weight());
    const bool coupled = model.coupling().g != 0.0;
    std::vector<double> k(P.size());
    for (std::size_t j = 0; j < m; ++j) {
        grid.momentum(j, k);
        op.diag[j] = model.free_energy(P, k);
        op.coupling[j] = coupled ? cplx(sw * model.rho_mom_radial(grid.momentum_norm(j)), 0.0) : cplx(0.0, 0.0);
    }
    return op;
}

ExtendedFiberOperator extend_fiber(const ArrowheadFiberOperator& op) { return ExtendedFiberOperator{op, op.diag}; }

FiberState apply_fiber(const ArrowheadFiberOperator& op, const FiberState& psi) {
    if (psi.size() != op.diag.size()) fail(ErrorKind::dimension, "state does not match the fiber grid");
    FiberState out(psi.size());
    cplx vac = op.head * psi.vacuum;
    for (std::size_t j = 0; j < psi.size(); ++j) {
        vac += std::conj(op.coupling[j]) * psi.field[j];
        out.field[j] = op.diag[j] * psi.field[j] + op.coupling[j] * psi.vacuum;
    }
    out.vacuum = vac;
    return out;
}

cplx fiber_expectation(const ArrowheadFiberOperator& op, const FiberState& psi) {
    return inner(psi, apply_fiber(op, psi));
}

PartitionSplit partition_split(const MomentumGrid& grid, const FiberState& psi, double R) {
    if (!(R > 0.0)) fail(ErrorKind::configuration, "partition radius must be positive");
    if (psi.size() != grid.size()) fail(ErrorKind::dimension, "state does not match grid");
    std::vector<cplx> pos(grid.size()), a(grid.size()), b(grid.size());
    grid.to_position(psi.field, pos);
    for (std::size_t j = 0; j < pos.size(); ++j) {
        const double r = grid.position_norm(j) / R;
        a[j] = partition_inner(r) * pos[j];
        b[j] = partition_outer(r) * pos[j];
    }
    PartitionSplit out{FiberState(grid.size()), std::vector<cplx>(grid.size())};
    out.inner.vacuum = psi.vacuum;
    grid.to_momentum(a, out.inner.field);
    grid.to_momentum(b, out.outer);
    return out;
}

}  // namespace fibscat
