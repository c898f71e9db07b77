#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "bisect.hpp"
#include "fibscat/errors.hpp"
#include "fibscat/kernels.hpp"
#include "fibscat/linalg.hpp"
#include "fibscat/spectral.hpp"

namespace fibscat {

std::string_view to_string(Provenance p) noexcept { return p == Provenance::secular ? "secular" : "dense"; }

struct EigenDecomposition::Impl {
    enum class Kind : unsigned char { root, deflated, complement, dense };
    struct Entry {
        Kind kind;
        std::size_t a;  // root index, field index, group index or dense column
        std::size_t b;  // complement index within the group
    };

    MomentumGrid grid;
    Provenance provenance = Provenance::secular;
    std::size_t n_field = 0;
    std::vector<double> values;
    std::vector<Entry> entries;

    // Reduced real arrowhead: poles delta_g (ascending) with couplings zhat_g.
    std::vector<double> poles;
    std::vector<double> zhat;
    // Roots lambda_i = base_i + tau_i, base_i being the nearest pole.
    std::vector<double> base;
    std::vector<double> tau;
    std::vector<double> root_norm;

    // Group g owns members group_member[group_offset[g] .. group_offset[g+1]),
    // the unit coupling direction u on those members, and (size - 1)
    // orthonormal complements stored member-contiguously from comp_offset[g].
    std::vector<std::size_t> group_offset;
    std::vector<std::size_t> group_member;
    std::vector<cplx> group_u;
    std::vector<std::size_t> comp_offset;
    std::vector<cplx> comp_vec;

    std::size_t deflated = 0;

    // dense provenance: row-major (n x n), eigenvector i is column i
    std::vector<cplx> dense_vectors;

    explicit Impl(const MomentumGrid& g) : grid(g) {}

    std::size_t dim() const noexcept { return n_field + 1; }
};

namespace {

using Impl = EigenDecomposition::Impl;

// Secular function relative to the pole `origin`:
// f(tau) = (poles[origin] + tau) - alpha - sum_g z2_g / ((poles[origin] - poles[g]) + tau).
struct Secular {
    const kernels::KernelTable& k;
    double alpha;
    const std::vector<double>& poles;
    const std::vector<double>& z2;

    double operator()(std::size_t origin, double tau) const {
        const double p = poles[origin];
        return (p - alpha + tau) - k.secular_sum(poles.data(), z2.data(), poles.size(), p, tau);
    }
};

// Complements of the unit vector u via a Householder reflector H with
// H u proportional to e_1: columns 2..s of H are orthonormal and orthogonal to u.
void householder_complements(std::span<const cplx> u, std::vector<cplx>& out) {
    const std::size_t s = u.size();
    const double a0 = std::abs(u[0]);
    const cplx phase = a0 > 0.0 ? u[0] / a0 : cplx(1.0, 0.0);
    std::vector<cplx> v(u.begin(), u.end());
    v[0] += phase;
    const double vv = norm2(v);
    for (std::size_t c = 1; c < s; ++c) {
        // column c of I - 2 v v^* / (v^* v)
        for (std::size_t r = 0; r < s; ++r) {
            cplx e = (r == c) ? cplx(1.0, 0.0) : cplx(0.0, 0.0);
            e -= 2.0 * v[r] * std::conj(v[c]) / vv;
            out.push_back(e);
        }
    }
}

}  // namespace

EigenDecomposition eigendecompose(const ArrowheadFiberOperator& op, const SecularOptions& opts) {
    const auto& K = kernels::active();
    auto impl = std::make_shared<Impl>(op.grid);
    const std::size_t m = op.diag.size();
    impl->n_field = m;
    if (op.coupling.size() != m) fail(ErrorKind::dimension, "coupling and diagonal sizes differ");
    const double scale = op.scale();
    const double zero_tol = opts.zero_coupling * scale;
    const double degen_tol = opts.degenerate * scale;

    std::vector<Impl::Entry> entries;
    std::vector<double> values;

    // (1) zero couplings are exact eigenpairs (d_j, e_j)
    std::vector<std::size_t> active;
    for (std::size_t j = 0; j < m; ++j) {
        if (std::abs(op.coupling[j]) <= zero_tol) {
            values.push_back(op.diag[j]);
            entries.push_back({Impl::Kind::deflated, j, 0});
            ++impl->deflated;
        } else {
            active.push_back(j);
        }
    }
    std::stable_sort(active.begin(), active.end(),
                     [&](std::size_t a, std::size_t b) { return op.diag[a] < op.diag[b]; });

    // (2) merge degenerate diagonal entries into one coupled direction plus complements
    std::vector<double> z2;
    impl->group_offset.push_back(0);
    impl->comp_offset.push_back(0);
    for (std::size_t start = 0; start < active.size();) {
        std::size_t end = start + 1;
        while (end < active.size() && op.diag[active[end]] - op.diag[active[start]] <= degen_tol) ++end;
        const std::size_t g = impl->poles.size();
        double znorm2 = 0.0, mean = 0.0;
        for (std::size_t i = start; i < end; ++i) {
            znorm2 += std::norm(op.coupling[active[i]]);
            mean += op.diag[active[i]];
        }
        mean /= static_cast<double>(end - start);
        const double znorm = std::sqrt(znorm2);
        const double pole = end - start == 1 ? op.diag[active[start]] : mean;
        std::vector<cplx> u;
        for (std::size_t i = start; i < end; ++i) {
            impl->group_member.push_back(active[i]);
            u.push_back(op.coupling[active[i]] / znorm);
        }
        impl->group_u.insert(impl->group_u.end(), u.begin(), u.end());
        householder_complements(u, impl->comp_vec);
        for (std::size_t c = 1; c < end - start; ++c) {
            values.push_back(pole);
            entries.push_back({Impl::Kind::complement, g, c - 1});
            ++impl->deflated;
        }
        impl->poles.push_back(pole);
        impl->zhat.push_back(znorm);
        z2.push_back(znorm2);
        impl->group_offset.push_back(impl->group_member.size());
        impl->comp_offset.push_back(impl->comp_vec.size());
        start = end;
    }

    // (3) secular roots, one per interlacing bracket
    const std::size_t ng = impl->poles.size();
    const auto& poles = impl->poles;
    const double alpha = op.head;
    impl->base.assign(ng + 1, 0.0);
    impl->tau.assign(ng + 1, 0.0);
    if (ng == 0) {
        impl->base[0] = alpha;
    } else {
        const double zn = std::sqrt(std::accumulate(z2.begin(), z2.end(), 0.0));
        const double lower = std::min(alpha, poles.front()) - zn;
        const double upper = std::max(alpha, poles.back()) + zn;
        const Secular f{K, alpha, poles, z2};
#pragma omp parallel for schedule(dynamic, 16)
        for (std::ptrdiff_t ii = 0; ii <= static_cast<std::ptrdiff_t>(ng); ++ii) {
            const std::size_t i = static_cast<std::size_t>(ii);
            std::size_t origin;
            double t;
            if (i == 0) {
                origin = 0;
                const double h = poles[0] - lower;
                t = -detail::bisect_positive(h, [&](double s) { return -f(origin, -s); });
            } else if (i == ng) {
                origin = ng - 1;
                const double h = upper - poles[ng - 1];
                t = detail::bisect_positive(h, [&](double s) { return f(origin, s); });
            } else {
                const double gap = poles[i] - poles[i - 1];
                if (f(i - 1, 0.5 * gap) > 0.0) {
                    origin = i - 1;
                    t = detail::bisect_positive(0.5 * gap, [&](double s) { return f(origin, s); });
                } else {
                    origin = i;
                    t = -detail::bisect_positive(0.5 * gap, [&](double s) { return -f(origin, -s); });
                }
            }
            impl->base[i] = poles[origin];
            impl->tau[i] = t;
        }
    }

    // interlacing sanity: lambda_i must lie in its bracket
    for (std::size_t i = 0; i <= ng && ng > 0; ++i) {
        const double lam = impl->base[i] + impl->tau[i];
        const bool ok = (i == 0 || lam >= poles[i - 1]) && (i == ng || lam <= poles[i]);
        if (!ok || !std::isfinite(lam))
            fail(ErrorKind::invariant_violation, "secular root " + std::to_string(i) + " left its interlacing bracket");
    }

    // (4) Loewner recomputation of the couplings from the computed roots, so
    // the closed-form eigenvectors are numerically orthogonal.
    if (ng > 0) {
        std::vector<double> zh(ng);
        const auto& b = impl->base;
        const auto& t = impl->tau;
        // delta_j - lambda_i evaluated through the stored shift
        auto dl = [&](std::size_t j, std::size_t i) { return (poles[j] - b[i]) - t[i]; };
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t jj = 0; jj < static_cast<std::ptrdiff_t>(ng); ++jj) {
            const std::size_t j = static_cast<std::size_t>(jj);
            // roots are 0..ng; root j lies below pole j, root j+1 above
            double prod = dl(j, j) * (-dl(j, j + 1));
            for (std::size_t i = 0; i < j; ++i) prod *= dl(j, i) / (poles[j] - poles[i]);
            for (std::size_t i = j + 1; i < ng; ++i) prod *= (-dl(j, i + 1)) / (poles[i] - poles[j]);
            zh[j] = std::sqrt(std::max(prod, 0.0));
        }
        impl->zhat = std::move(zh);
    }

    // (5) normalization of (1, zhat / (lambda - delta))
    impl->root_norm.assign(ng + 1, 1.0);
    if (ng > 0) {
        std::vector<double> zh2(ng);
        for (std::size_t g = 0; g < ng; ++g) zh2[g] = impl->zhat[g] * impl->zhat[g];
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t ii = 0; ii <= static_cast<std::ptrdiff_t>(ng); ++ii) {
            const std::size_t i = static_cast<std::size_t>(ii);
            const double s = K.secular_sum_sq(poles.data(), zh2.data(), ng, impl->base[i], impl->tau[i]);
            impl->root_norm[i] = 1.0 / std::sqrt(1.0 + s);
        }
    }
    for (std::size_t i = 0; i <= ng; ++i) {
        values.push_back(impl->base[i] + impl->tau[i]);
        entries.push_back({Impl::Kind::root, i, 0});
    }

    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    impl->values.reserve(values.size());
    impl->entries.reserve(values.size());
    for (std::size_t i : order) {
        impl->values.push_back(values[i]);
        impl->entries.push_back(entries[i]);
    }
    return EigenDecomposition(std::move(impl));
}

EigenDecomposition eigendecompose_dense(const ArrowheadFiberOperator& op) {
    auto impl = std::make_shared<Impl>(op.grid);
    impl->provenance = Provenance::dense;
    impl->n_field = op.diag.size();
    const std::size_t n = op.dim();
    DenseEigen de = hermitian_eigen(op.dense(), n);
    impl->values = std::move(de.values);
    impl->dense_vectors = std::move(de.vectors);
    for (std::size_t i = 0; i < n; ++i) impl->entries.push_back({Impl::Kind::dense, i, 0});
    return EigenDecomposition(std::move(impl));
}

// ---------------------------------------------------------------------------

std::size_t EigenDecomposition::size() const noexcept { return impl_->values.size(); }
std::span<const double> EigenDecomposition::eigenvalues() const noexcept { return impl_->values; }
Provenance EigenDecomposition::provenance() const noexcept { return impl_->provenance; }
const MomentumGrid& EigenDecomposition::grid() const noexcept { return impl_->grid; }
std::size_t EigenDecomposition::deflated_count() const noexcept { return impl_->deflated; }

FiberState EigenDecomposition::eigenvector(std::size_t i) const {
    if (i >= size()) fail(ErrorKind::domain, "eigenvector index out of range");
    const Impl& d = *impl_;
    FiberState v(d.n_field);
    const auto& e = d.entries[i];
    switch (e.kind) {
    case Impl::Kind::dense: {
        const std::size_t n = d.dim();
        v.vacuum = d.dense_vectors[e.a];
        for (std::size_t r = 1; r < n; ++r) v.field[r - 1] = d.dense_vectors[r * n + e.a];
        break;
    }
    case Impl::Kind::deflated: v.field[e.a] = 1.0; break;
    case Impl::Kind::complement: {
        const std::size_t g = e.a;
        const std::size_t s = d.group_offset[g + 1] - d.group_offset[g];
        const cplx* q = d.comp_vec.data() + d.comp_offset[g] + e.b * s;
        for (std::size_t r = 0; r < s; ++r) v.field[d.group_member[d.group_offset[g] + r]] = q[r];
        break;
    }
    case Impl::Kind::root: {
        const double nr = d.root_norm[e.a];
        v.vacuum = nr;
        for (std::size_t g = 0; g < d.poles.size(); ++g) {
            const double y = nr * d.zhat[g] / ((d.base[e.a] - d.poles[g]) + d.tau[e.a]);
            for (std::size_t q = d.group_offset[g]; q < d.group_offset[g + 1]; ++q)
                v.field[d.group_member[q]] = y * d.group_u[q];
        }
        break;
    }
    }
    return v;
}

std::vector<cplx> EigenDecomposition::project(const FiberState& psi) const {
    const Impl& d = *impl_;
    if (psi.size() != d.n_field) fail(ErrorKind::dimension, "state does not match the decomposition");
    const std::size_t n = d.dim();
    std::vector<cplx> out(n);

    if (d.provenance == Provenance::dense) {
        for (std::size_t i = 0; i < n; ++i) {
            cplx s = std::conj(d.dense_vectors[i]) * psi.vacuum;
            for (std::size_t r = 1; r < n; ++r) s += std::conj(d.dense_vectors[r * n + i]) * psi.field[r - 1];
            out[i] = s;
        }
        return out;
    }

    const std::size_t ng = d.poles.size();
    std::vector<double> wre(ng), wim(ng);
    for (std::size_t g = 0; g < ng; ++g) {
        cplx y{0.0, 0.0};
        for (std::size_t q = d.group_offset[g]; q < d.group_offset[g + 1]; ++q)
            y += std::conj(d.group_u[q]) * psi.field[d.group_member[q]];
        y *= d.zhat[g];
        wre[g] = y.real();
        wim[g] = y.imag();
    }
    const auto& K = kernels::active();
    std::vector<cplx> root_coef(ng + 1);
#pragma omp parallel for schedule(static) if (ng > 256)
    for (std::ptrdiff_t ii = 0; ii <= static_cast<std::ptrdiff_t>(ng); ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        double acc[2] = {0.0, 0.0};
        if (ng > 0) K.cauchy_dot(d.poles.data(), wre.data(), wim.data(), ng, d.base[i], d.tau[i], acc);
        root_coef[i] = d.root_norm[i] * (psi.vacuum + cplx(acc[0], acc[1]));
    }
    for (std::size_t k = 0; k < n; ++k) {
        const auto& e = d.entries[k];
        switch (e.kind) {
        case Impl::Kind::root: out[k] = root_coef[e.a]; break;
        case Impl::Kind::deflated: out[k] = psi.field[e.a]; break;
        case Impl::Kind::complement: {
            const std::size_t g = e.a;
            const std::size_t s = d.group_offset[g + 1] - d.group_offset[g];
            const cplx* q = d.comp_vec.data() + d.comp_offset[g] + e.b * s;
            cplx acc{0.0, 0.0};
            for (std::size_t r = 0; r < s; ++r) acc += std::conj(q[r]) * psi.field[d.group_member[d.group_offset[g] + r]];
            out[k] = acc;
            break;
        }
        case Impl::Kind::dense: break;
        }
    }
    return out;
}

FiberState EigenDecomposition::synthesize(std::span<const cplx> c) const {
    const Impl& d = *impl_;
    const std::size_t n = d.dim();
    if (c.size() != n) fail(ErrorKind::dimension, "coefficient array does not match the decomposition");
    FiberState psi(d.n_field);

    if (d.provenance == Provenance::dense) {
        for (std::size_t r = 0; r < n; ++r) {
            cplx s{0.0, 0.0};
            const cplx* row = d.dense_vectors.data() + r * n;
            for (std::size_t i = 0; i < n; ++i) s += row[i] * c[i];
            if (r == 0)
                psi.vacuum = s;
            else
                psi.field[r - 1] = s;
        }
        return psi;
    }

    const std::size_t ng = d.poles.size();
    std::vector<double> are(ng + 1), aim(ng + 1);
    for (std::size_t k = 0; k < n; ++k) {
        const auto& e = d.entries[k];
        switch (e.kind) {
        case Impl::Kind::root: {
            const cplx a = d.root_norm[e.a] * c[k];
            are[e.a] = a.real();
            aim[e.a] = a.imag();
            break;
        }
        case Impl::Kind::deflated: psi.field[e.a] = c[k]; break;
        case Impl::Kind::complement: {
            const std::size_t g = e.a;
            const std::size_t s = d.group_offset[g + 1] - d.group_offset[g];
            const cplx* q = d.comp_vec.data() + d.comp_offset[g] + e.b * s;
            for (std::size_t r = 0; r < s; ++r) psi.field[d.group_member[d.group_offset[g] + r]] += q[r] * c[k];
            break;
        }
        case Impl::Kind::dense: break;
        }
    }
    double vre = 0.0, vim = 0.0;
    for (std::size_t i = 0; i <= ng; ++i) {
        vre += are[i];
        vim += aim[i];
    }
    psi.vacuum = cplx(vre, vim);
    const auto& K = kernels::active();
#pragma omp parallel for schedule(static) if (ng > 256)
    for (std::ptrdiff_t gg = 0; gg < static_cast<std::ptrdiff_t>(ng); ++gg) {
        const std::size_t g = static_cast<std::size_t>(gg);
        double acc[2];
        K.cauchy_dot_rows(d.base.data(), d.tau.data(), are.data(), aim.data(), ng + 1, d.poles[g], acc);
        const cplx y = d.zhat[g] * cplx(acc[0], acc[1]);
        for (std::size_t q = d.group_offset[g]; q < d.group_offset[g + 1]; ++q)
            psi.field[d.group_member[q]] += y * d.group_u[q];
    }
    return psi;
}

FiberState EigenDecomposition::apply_function(const FiberState& psi, const std::function<cplx(double)>& f) const {
    auto c = project(psi);
    const auto values = eigenvalues();
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= f(values[i]);
    return synthesize(c);
}

FiberState EigenDecomposition::evolve(const FiberState& psi, double t) const {
    auto c = project(psi);
    const auto values = eigenvalues();
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= std::polar(1.0, -t * values[i]);
    return synthesize(c);
}

}  // namespace fibscat
