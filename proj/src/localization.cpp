#include <cmath>
#include <random>

#include "fibscat/errors.hpp"
#include "fibscat/fiber.hpp"
#include "fibscat/spectral.hpp"

namespace fibscat {

namespace {

// D = J f(H) - f(H^ext) J with J psi = (j0 psi, j_inf psi.field), a map
// from C + L^2 into (C + L^2) + L^2.
struct LocalizationMap {
    const MomentumGrid& grid;
    const EigenDecomposition& eig;
    const EnergyWindow& f;
    std::vector<double> free_f;  // f(F_P(k_j))
    std::vector<double> j0, jinf;

    struct Image {
        FiberState a;
        std::vector<cplx> b;
    };

    FiberState fH(const FiberState& psi) const {
        return eig.apply_function(psi, [&](double e) { return cplx(f(e), 0.0); });
    }

    void mult(std::span<cplx> field, const std::vector<double>& m) const {
        multiply_position(grid, field, [&](std::size_t j) { return m[j]; });
    }

    Image apply(const FiberState& psi) const {
        FiberState h = fH(psi);
        Image out{h, h.field};
        mult(out.a.field, j0);  // j0 f(H) psi
        mult(out.b, jinf);      // j_inf f(H) psi
        FiberState jp = psi;
        mult(jp.field, j0);
        out.a -= fH(jp);
        std::vector<cplx> jb = psi.field;
        mult(jb, jinf);
        for (std::size_t k = 0; k < jb.size(); ++k) out.b[k] -= free_f[k] * jb[k];
        return out;
    }

    FiberState adjoint(const Image& in) const {
        // f(H)(j0 a + (0, j_inf b)) - j0 f(H) a - (0, j_inf f(F) b)
        FiberState s = in.a;
        mult(s.field, j0);
        std::vector<cplx> jb = in.b;
        mult(jb, jinf);
        for (std::size_t k = 0; k < jb.size(); ++k) s.field[k] += jb[k];
        FiberState out = fH(s);
        FiberState ha = fH(in.a);
        mult(ha.field, j0);
        out -= ha;
        std::vector<cplx> fb(in.b.size());
        for (std::size_t k = 0; k < fb.size(); ++k) fb[k] = free_f[k] * in.b[k];
        mult(fb, jinf);
        for (std::size_t k = 0; k < fb.size(); ++k) out.field[k] -= fb[k];
        return out;
    }
};

}  // namespace

double localization_error(const DispersionModel& model, const MomentumGrid& grid, std::span<const double> P,
                          const EnergyWindow& f, double R, const LocalizationOptions& opts) {
    if (!(R > 0.0)) fail(ErrorKind::configuration, "partition radius must be positive");
    const auto op = assemble_fiber(model, grid, P);
    const auto eig = eigendecompose(op);
    LocalizationMap D{grid, eig, f, {}, {}, {}};
    D.free_f.resize(grid.size());
    D.j0.resize(grid.size());
    D.jinf.resize(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        D.free_f[k] = f(op.diag[k]);
        const double r = grid.position_norm(k) / R;
        D.j0[k] = partition_inner(r);
        D.jinf[k] = partition_outer(r);
    }

    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> normal;
    FiberState v(grid.size());
    v.vacuum = cplx(normal(rng), normal(rng));
    for (auto& c : v.field) c = cplx(normal(rng), normal(rng));
    v *= 1.0 / v.norm();

    double estimate = 0.0;
    for (int it = 0; it < opts.max_iterations; ++it) {
        const auto img = D.apply(v);
        const double value = img.a.norm2() + norm2(img.b);
        FiberState w = D.adjoint(img);
        const double wn = w.norm();
        const bool done = std::abs(value - estimate) <= opts.relative_tolerance * value;
        estimate = value;
        if (wn == 0.0 || done) break;
        v = (1.0 / wn) * w;
    }
    return std::sqrt(estimate);
}

}  // namespace fibscat
