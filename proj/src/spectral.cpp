#include "fibscat/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "bisect.hpp"
#include "fibscat/errors.hpp"
#include "fibscat/kernels.hpp"
#include "fibscat/smooth.hpp"
#include "fibscat/thresholds.hpp"

namespace fibscat {

namespace {

double norm_of(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

std::vector<double> axis_direction(std::span<const double> P) {
    std::vector<double> e(P.size(), 0.0);
    const double pn = norm_of(P);
    if (pn > 0.0)
        for (std::size_t a = 0; a < P.size(); ++a) e[a] = P[a] / pn;
    else
        e[0] = 1.0;
    return e;
}

}  // namespace

SigmaEssResult sigma_ess_detail(const DispersionModel& model, std::span<const double> P) {
    if (P.size() != static_cast<std::size_t>(model.nu())) fail(ErrorKind::dimension, "P has wrong dimension");
    const double pn = norm_of(P);
    const auto e = axis_direction(P);
    SigmaEssResult out;
    out.minimizer.assign(e.size(), 0.0);
    if (model.matter().flat() && model.field().flat()) {
        out.value = model.matter().level + model.field().level;
        return out;
    }

    // bracketed 1-D minimization of the axis energy
    const double radius = 2.0 * pn + 32.0;
    const int n = 4096;
    double best_t = 0.0, best = std::numeric_limits<double>::infinity();
    int best_i = 0;
    for (int i = 0; i <= n; ++i) {
        const double t = -radius + 2.0 * radius * i / n;
        const double v = axis_energy(model, pn, t);
        if (v < best) {
            best = v;
            best_t = t;
            best_i = i;
        }
    }
    if (best_i == 0 || best_i == n)
        fail(ErrorKind::numerical, "axis energy minimum sits at the edge of the search segment");
    boost::uintmax_t iters = 500;
    const auto r = boost::math::tools::brent_find_minima(
        [&](double t) { return axis_energy(model, pn, t); }, best_t - 2.0 * radius / n, best_t + 2.0 * radius / n,
        std::numeric_limits<double>::digits, iters);
    if (iters >= 500) fail(ErrorKind::numerical, "Sigma_ess minimization did not converge");
    best_t = r.first;
    best = r.second;

    // the minimizer is a critical point, so the threshold set refines it
    const ThresholdSet th = threshold_set(model, P);
    for (const auto& w : th.witnesses) {
        if (w.energy < best) {
            best = w.energy;
            double t = 0.0;
            for (std::size_t a = 0; a < e.size(); ++a) t += w.k[a] * e[a];
            best_t = t;
        }
    }
    out.value = best;
    for (std::size_t a = 0; a < e.size(); ++a) out.minimizer[a] = best_t * e[a];
    return out;
}

double sigma_ess(const DispersionModel& model, std::span<const double> P) { return sigma_ess_detail(model, P).value; }

// ---------------------------------------------------------------------------

std::optional<MassShell> mass_shell(const ArrowheadFiberOperator& op, double sigma_ess_value) {
    const std::size_t m = op.diag.size();
    double dmin = std::numeric_limits<double>::infinity();
    for (double d : op.diag) dmin = std::min(dmin, d);
    std::vector<double> poles, w;
    bool pole_at_min = false;
    double wsum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double c2 = std::norm(op.coupling[j]);
        if (c2 == 0.0) continue;
        if (op.diag[j] == dmin) pole_at_min = true;
        poles.push_back(op.diag[j]);
        w.push_back(c2);
        wsum += c2;
    }
    const auto& K = kernels::active();
    // f(tau) = (dmin + tau) - head - sum w / ((dmin - d) + tau), increasing below dmin
    auto f = [&](double tau) {
        return (dmin - op.head + tau) - K.secular_sum(poles.data(), w.data(), poles.size(), dmin, tau);
    };
    double energy;
    if (poles.empty()) {
        energy = op.head;
        if (!(energy < dmin)) return std::nullopt;
    } else {
        if (!pole_at_min && !(f(0.0) > 0.0)) return std::nullopt;
        const double lower = std::min(op.head, dmin) - std::sqrt(wsum);
        const double h = dmin - lower;
        const double s = detail::bisect_positive(h, [&](double s) { return -f(-s); });
        energy = dmin - s;
        if (!(energy < dmin)) return std::nullopt;
    }
    if (!(energy < sigma_ess_value)) return std::nullopt;

    MassShell shell{energy, FiberState(m)};
    shell.state.vacuum = 1.0;
    for (std::size_t j = 0; j < m; ++j) shell.state.field[j] = op.coupling[j] / (energy - op.diag[j]);
    shell.state *= 1.0 / shell.state.norm();
    return shell;
}

std::optional<MassShell> mass_shell(const DispersionModel& model, const MomentumGrid& grid, std::span<const double> P) {
    const auto op = assemble_fiber(model, grid, P);
    return mass_shell(op, sigma_ess(model, P));
}

// ---------------------------------------------------------------------------

std::vector<double> weyl_center(const DispersionModel& model, std::span<const double> P, double lambda) {
    const auto se = sigma_ess_detail(model, P);
    const double scale = std::max(1.0, std::abs(se.value));
    if (lambda < se.value - 1e-12 * scale)
        fail(ErrorKind::domain, "lambda lies below Sigma_ess(P); no Weyl sequence exists");
    const auto e = axis_direction(P);
    const double pn = norm_of(P);
    double t0 = 0.0;
    for (std::size_t a = 0; a < e.size(); ++a) t0 += se.minimizer[a] * e[a];
    if (lambda <= se.value) return se.minimizer;
    auto h = [&](double t) { return axis_energy(model, pn, t) - lambda; };
    // march outward from the minimizer until the energy exceeds lambda
    for (double dir : {1.0, -1.0}) {
        double step = 1e-3;
        double lo = t0;
        for (int i = 0; i < 80; ++i, step *= 2.0) {
            const double hi = t0 + dir * step;
            if (h(hi) >= 0.0) {
                boost::uintmax_t iters = 200;
                const auto r = boost::math::tools::toms748_solve(h, std::min(lo, hi), std::max(lo, hi),
                                                                 boost::math::tools::eps_tolerance<double>(52), iters);
                const double t = 0.5 * (r.first + r.second);
                std::vector<double> k(e.size());
                for (std::size_t a = 0; a < e.size(); ++a) k[a] = t * e[a];
                return k;
            }
            lo = hi;
        }
    }
    fail(ErrorKind::domain, "no momentum on the axis reaches energy lambda");
}

double weyl_residual(const DispersionModel& model, const MomentumGrid& grid, std::span<const double> P, double lambda,
                     double n) {
    if (!(n > 0.0)) fail(ErrorKind::configuration, "Weyl index n must be positive");
    const auto k0 = weyl_center(model, P, lambda);
    const double amp = std::pow(n, 0.5 * model.nu());
    FiberState u = sample_state(grid, 0.0, [&](std::span<const double> k) {
        double r2 = 0.0;
        for (std::size_t a = 0; a < k.size(); ++a) r2 += (k[a] - k0[a]) * (k[a] - k0[a]);
        return amp * bump(n * std::sqrt(r2));
    });
    const double un = u.norm();
    if (!(un > 0.0)) fail(ErrorKind::domain, "Weyl bump is not resolved by the grid");
    const auto op = assemble_fiber(model, grid, P);
    FiberState r = apply_fiber(op, u);
    r -= cplx(lambda) * u;
    return r.norm() / un;
}

// ---------------------------------------------------------------------------

SpectralAtlas spectral_atlas(const DispersionModel& model, const MomentumGrid& grid,
                             const std::vector<std::vector<double>>& P_list) {
    SpectralAtlas atlas;
    atlas.entries.resize(P_list.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(P_list.size()); ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        AtlasEntry& entry = atlas.entries[i];
        entry.P = P_list[i];
        try {
            entry.sigma_ess = sigma_ess(model, entry.P);
            entry.thresholds = threshold_set(model, entry.P).energies;
            // every diagonal entry is >= Sigma_ess, so by interlacing only the
            // lowest secular root can lie below it
            const auto op = assemble_fiber(model, grid, entry.P);
            if (auto shell = mass_shell(op, entry.sigma_ess)) {
                entry.E0 = shell->energy;
                entry.eigenvalues_below.push_back(shell->energy);
            }
        } catch (const Error& err) {
            entry.ok = false;
            entry.error = err.what();
        }
    }
    return atlas;
}

}  // namespace fibscat
