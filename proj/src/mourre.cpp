#include "fibscat/mourre.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fibscat/errors.hpp"
#include "fibscat/linalg.hpp"
#include "fibscat/spectral.hpp"
#include "fibscat/thresholds.hpp"

namespace fibscat {

ConjugateOperator::ConjugateOperator(const DispersionModel& model, const MomentumGrid& grid, std::span<const double> P0)
    : grid_(grid), P0_(P0.begin(), P0.end()), size_(grid.size()) {
    const std::size_t nu = static_cast<std::size_t>(grid.nu());
    if (P0.size() != nu || model.nu() != grid.nu()) fail(ErrorKind::dimension, "P0 has wrong dimension");
    velocity_.resize(nu * size_);
    positions_.resize(nu * size_);
    std::vector<double> k(nu), v(nu);
    for (std::size_t j = 0; j < size_; ++j) {
        grid.momentum(j, k);
        group_velocity(model, P0, k, v);
        for (std::size_t a = 0; a < nu; ++a) {
            velocity_[a * size_ + j] = v[a];
            positions_[a * size_ + j] = grid.position(j, static_cast<int>(a));
        }
    }
}

std::vector<cplx> ConjugateOperator::apply_field(std::span<const cplx> field) const {
    if (field.size() != size_) fail(ErrorKind::dimension, "field does not match grid");
    std::vector<cplx> out(size_, cplx(0.0, 0.0)), pos(size_), tmp(size_);
    for (int a = 0; a < grid_.nu(); ++a) {
        const double* v = velocity_.data() + static_cast<std::size_t>(a) * size_;
        const double* x = positions_.data() + static_cast<std::size_t>(a) * size_;
        // V X psi
        grid_.to_position(field, pos);
        for (std::size_t j = 0; j < size_; ++j) pos[j] *= x[j];
        grid_.to_momentum(pos, tmp);
        for (std::size_t j = 0; j < size_; ++j) out[j] += 0.5 * v[j] * tmp[j];
        // X V psi
        for (std::size_t j = 0; j < size_; ++j) tmp[j] = v[j] * field[j];
        grid_.to_position(tmp, pos);
        for (std::size_t j = 0; j < size_; ++j) pos[j] *= x[j];
        grid_.to_momentum(pos, tmp);
        for (std::size_t j = 0; j < size_; ++j) out[j] += 0.5 * tmp[j];
    }
    return out;
}

FiberState ConjugateOperator::apply(const FiberState& psi) const { return FiberState(0.0, apply_field(psi.field)); }

std::vector<cplx> ConjugateOperator::dense() const {
    const std::size_t n = size_ + 1;
    std::vector<cplx> m(n * n, cplx(0.0, 0.0));
    std::vector<cplx> e(size_, cplx(0.0, 0.0));
    for (std::size_t c = 0; c < size_; ++c) {
        e[c] = 1.0;
        const auto col = apply_field(e);
        e[c] = 0.0;
        for (std::size_t r = 0; r < size_; ++r) m[(r + 1) * n + c + 1] = col[r];
    }
    return m;
}

double ConjugateOperator::norm_bound() const noexcept {
    double s = 0.0;
    for (int a = 0; a < grid_.nu(); ++a) {
        double vmax = 0.0;
        for (std::size_t j = 0; j < size_; ++j)
            vmax = std::max(vmax, std::abs(velocity_[static_cast<std::size_t>(a) * size_ + j]));
        s += vmax * 0.5 * grid_.box_length();
    }
    return s;
}

ConjugateOperator assemble_conjugate(const DispersionModel& model, const MomentumGrid& grid, std::span<const double> P0) {
    return ConjugateOperator(model, grid, P0);
}

// ---------------------------------------------------------------------------

FiberState CommutatorMatrix::apply(const FiberState& psi) const {
    if (psi.size() != diag.size()) fail(ErrorKind::dimension, "state does not match commutator");
    FiberState out(psi.size());
    cplx vac{0.0, 0.0};
    for (std::size_t j = 0; j < diag.size(); ++j) {
        vac += std::conj(column[j]) * psi.field[j];
        out.field[j] = diag[j] * psi.field[j] + column[j] * psi.vacuum;
    }
    out.vacuum = vac;
    return out;
}

std::vector<cplx> CommutatorMatrix::dense() const {
    const std::size_t n = diag.size() + 1;
    std::vector<cplx> m(n * n, cplx(0.0, 0.0));
    for (std::size_t j = 0; j < diag.size(); ++j) {
        m[j + 1] = std::conj(column[j]);
        m[(j + 1) * n] = column[j];
        m[(j + 1) * n + j + 1] = diag[j];
    }
    return m;
}

FiberState direct_commutator(const ArrowheadFiberOperator& op, const ConjugateOperator& A, const FiberState& psi) {
    FiberState out = apply_fiber(op, A.apply(psi));
    out -= A.apply(apply_fiber(op, psi));
    out *= cplx(0.0, 1.0);
    return out;
}

std::vector<FiberState> commutator_probes(const MomentumGrid& grid) {
    // Gaussian packets balanced between the momentum and position boxes;
    // 9 widths on either side keep the tails below double precision.
    const double half_box = 0.5 * grid.box_length();
    const double s = std::sqrt(grid.k_max() / half_box);
    const double k_room = grid.k_max() - 9.0 * s;
    const double x_room = half_box - 9.0 / s;
    std::vector<FiberState> probes;
    if (k_room < 0.0 || x_room < 0.0) return probes;
    for (double kc : {0.0, 0.5 * k_room, -0.5 * k_room})
        for (double xc : {0.0, 0.5 * x_room, -0.5 * x_room}) {
            auto p = sample_state(grid, 0.0, [&](std::span<const double> k) {
                double r2 = 0.0;
                for (std::size_t a = 0; a < k.size(); ++a) {
                    const double d = k[a] - (a == 0 ? kc : 0.0);
                    r2 += d * d;
                }
                return std::exp(-0.5 * r2 / (s * s)) * std::polar(1.0, -k[0] * xc);
            });
            p.vacuum = 0.5;
            p *= 1.0 / p.norm();
            probes.push_back(std::move(p));
        }
    return probes;
}

CommutatorMatrix assemble_commutator(const DispersionModel& model, const MomentumGrid& grid, std::span<const double> P,
                                     std::span<const double> P0, const CommutatorOptions& opts) {
    const auto op = assemble_fiber(model, grid, P);
    const ConjugateOperator A(model, grid, P0);
    const std::size_t m = grid.size();
    const std::size_t nu = static_cast<std::size_t>(grid.nu());
    CommutatorMatrix c;
    c.diag.resize(m);
    std::vector<double> k(nu), gF(nu);
    for (std::size_t j = 0; j < m; ++j) {
        grid.momentum(j, k);
        group_velocity(model, P, k, gF);
        double s = 0.0;
        for (std::size_t a = 0; a < nu; ++a) s += A.velocity(static_cast<int>(a), j) * gF[a];
        c.diag[j] = s;
    }
    c.column = A.apply_field(op.coupling);
    for (auto& v : c.column) v *= cplx(0.0, -1.0);

    double dmax = 0.0;
    for (double d : c.diag) dmax = std::max(dmax, std::abs(d));
    c.scale = std::max({dmax, std::sqrt(norm2(c.column)), 1e-300});

    if (opts.verify) {
        const auto probes = commutator_probes(grid);
        c.verified = !probes.empty();
        for (const auto& p : probes) {
            FiberState diff = c.apply(p);
            diff -= direct_commutator(op, A, p);
            c.discrepancy = std::max(c.discrepancy, diff.norm());
        }
        if (c.discrepancy > opts.tolerance * c.scale)
            fail(ErrorKind::invariant_violation,
                 "closed-form commutator differs from i(HA - AH) by " + std::to_string(c.discrepancy) +
                     " (scale " + std::to_string(c.scale) + "); grid too coarse or box too small");
    }
    return c;
}

// ---------------------------------------------------------------------------

MourreResult mourre_constant(const DispersionModel& model, const MomentumGrid& grid, std::span<const double> P,
                             std::span<const double> P0, double lambda, double kappa) {
    if (!(kappa > 0.0)) fail(ErrorKind::configuration, "kappa must be positive");
    MourreResult out;
    const auto th = threshold_set(model, P);
    for (double e : th.energies)
        if (std::abs(e - lambda) <= kappa) {
            out.threshold_in_window = true;
            out.warnings.push_back("threshold " + std::to_string(e) + " lies inside the window");
        }
    const double sig = sigma_ess(model, P);
    const auto op = assemble_fiber(model, grid, P);
    const auto eig = eigendecompose(op);
    const auto K = assemble_commutator(model, grid, P, P0);
    out.discrepancy = K.discrepancy;

    std::vector<std::size_t> window;
    const auto values = eig.eigenvalues();
    for (std::size_t i = 0; i < values.size(); ++i)
        if (values[i] >= lambda - kappa && values[i] <= lambda + kappa && values[i] >= sig) window.push_back(i);
    if (window.empty()) fail(ErrorKind::domain, "no eigenvalues of H(P) in the Mourre window");
    const std::size_t n = window.size();
    out.n_window = static_cast<int>(n);

    std::vector<FiberState> phi(n), kphi(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        phi[i] = eig.eigenvector(window[i]);
        kphi[i] = K.apply(phi[i]);
    }
    std::vector<cplx> G(n * n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t rr = 0; rr < static_cast<std::ptrdiff_t>(n); ++rr) {
        const std::size_t r = static_cast<std::size_t>(rr);
        for (std::size_t c = 0; c < n; ++c) G[r * n + c] = inner(phi[r], kphi[c]);
    }
    // symmetrize away round-off before the Hermitian solver
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = r; c < n; ++c) {
            const cplx avg = 0.5 * (G[r * n + c] + std::conj(G[c * n + r]));
            G[r * n + c] = avg;
            G[c * n + r] = std::conj(avg);
        }
    const auto de = hermitian_eigen(std::move(G), n, false);
    out.c_est = de.values.front();
    return out;
}

VirialResult virial_check(const DispersionModel& model, const MomentumGrid& grid, std::span<const double> P,
                          std::span<const double> P0) {
    VirialResult out;
    const auto K = assemble_commutator(model, grid, P, P0);
    out.scale = K.scale;
    const auto shell = mass_shell(model, grid, P);
    if (!shell) return out;
    out.has_shell = true;
    out.value = inner(shell->state, K.apply(shell->state)).real();
    return out;
}

}  // namespace fibscat
