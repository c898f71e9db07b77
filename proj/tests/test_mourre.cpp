#include <cmath>
#include <random>

#include "doctest.h"

#include "fibscat/errors.hpp"
#include "fibscat/mourre.hpp"
#include "fibscat/spectral.hpp"
#include "oracles.hpp"

using namespace fibscat;

TEST_CASE("conjugate operator is Hermitian") {
    const auto m = oracle::nelson();
    const MomentumGrid grid(1, 64, 6.0);
    const double P0[] = {0.4};
    const auto A = assemble_conjugate(m, grid, P0);
    const auto d = A.dense();
    const std::size_t n = grid.size() + 1;
    double asym = 0.0, amax = 0.0;
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            asym = std::max(asym, std::abs(d[r * n + c] - std::conj(d[c * n + r])));
            amax = std::max(amax, std::abs(d[r * n + c]));
        }
    CHECK(asym <= 1e-13 * amax);
}

TEST_CASE("closed-form commutator matches the direct commutator on probes") {
    for (const auto& m : {oracle::nelson(), oracle::relativistic(), oracle::polaron()}) {
        const MomentumGrid grid(1, 256, 10.0);
        const double P[] = {0.5}, P0[] = {0.3};
        const auto K = assemble_commutator(m, grid, P, P0);
        CHECK(K.verified);
        CHECK(K.discrepancy <= 1e-10 * K.scale);
    }
}

TEST_CASE("closed form against the full dense commutator on band-limited vectors") {
    // i [H, A] assembled from dense matrices, applied to a smooth packet
    const auto m = oracle::nelson();
    const MomentumGrid grid(1, 160, 5.0);
    const double P[] = {0.2}, P0[] = {0.2};
    const auto op = assemble_fiber(m, grid, P);
    const auto A = assemble_conjugate(m, grid, P0);
    const auto K = assemble_commutator(m, grid, P, P0, {false, 1e-8});
    const Eigen::MatrixXcd h = oracle::dense(op);
    const auto ad = A.dense();
    const auto n = static_cast<Eigen::Index>(grid.size() + 1);
    Eigen::MatrixXcd a(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c) a(r, c) = ad[static_cast<std::size_t>(r * n + c)];
    const Eigen::MatrixXcd direct = cplx(0.0, 1.0) * (h * a - a * h);
    const auto psi = oracle::packet(grid, 0.5, 0.3, 0.0, cplx(0.4, 0.0));
    const Eigen::VectorXcd got = oracle::vec(K.apply(psi));
    CHECK((got - direct * oracle::vec(psi)).norm() <= 1e-10 * K.scale);
}

TEST_CASE("virial theorem on the mass shell") {
    const auto m = oracle::nelson(0.3);
    const MomentumGrid grid(1, 256, 10.0);
    const double P[] = {0.4};
    const auto v = virial_check(m, grid, P, P);
    REQUIRE(v.has_shell);
    CHECK(std::abs(v.value) <= 1e-8 * v.scale);
}

TEST_CASE("Mourre constant is positive away from thresholds") {
    const auto m = oracle::nelson(0.05);
    const MomentumGrid grid(1, 1024, 6.0);
    const double P[] = {0.5};
    const double sig = sigma_ess(m, P);
    const auto r = mourre_constant(m, grid, P, P, sig + 1.0, 0.05);
    CHECK(r.n_window > 0);
    CHECK_FALSE(r.threshold_in_window);
    CHECK(r.c_est > 0.0);
    CHECK_THROWS_AS(mourre_constant(m, grid, P, P, sig - 2.0, 0.05), Error);
}

TEST_CASE("window on a threshold is flagged") {
    const auto m = oracle::nelson(0.05);
    const MomentumGrid grid(1, 512, 6.0);
    const double P[] = {0.5};
    const auto r = mourre_constant(m, grid, P, P, sigma_ess(m, P) + 0.01, 0.05);
    CHECK(r.threshold_in_window);
    CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("conjugate operator vanishes for flat dispersions") {
    const DispersionModel m(1, {DispersionFamily::constant, 1.0, 0.5}, {DispersionFamily::constant, 1.0, 1.0},
                            Coupling{}, 1.0);
    const MomentumGrid grid(1, 32, 4.0);
    const double P0[] = {0.3};
    const auto d = assemble_conjugate(m, grid, P0).dense();
    for (const auto& x : d) CHECK(std::abs(x) == 0.0);
}

TEST_CASE("expectation of A is real") {
    const auto m = oracle::relativistic();
    const MomentumGrid grid(1, 128, 6.0);
    const double P0[] = {0.2};
    const auto A = assemble_conjugate(m, grid, P0);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        FiberState psi(cplx(n(rng), n(rng)), std::vector<cplx>(grid.size()));
        for (auto& z : psi.field) z = cplx(n(rng), n(rng));
        const cplx e = inner(psi, A.apply(psi));
        CHECK(std::abs(e.imag()) <= 1e-12 * std::abs(e.real()) + 1e-12);
    }
}

TEST_CASE("commutator is the time derivative of <A>") {
    const auto m = oracle::nelson(0.3);
    const MomentumGrid grid(1, 64, 6.0);
    const double P[] = {0.4};
    const auto op = assemble_fiber(m, grid, P);
    const auto A = assemble_conjugate(m, grid, P);
    const auto psi = oracle::packet(grid, 0.5, 0.6, 0.0, cplx(0.3, 0.0));
    const double exact = inner(psi, direct_commutator(op, A, psi)).real();
    const Eigen::MatrixXcd h = oracle::dense(op);
    auto expect_A = [&](double t) {
        const auto psi_t = oracle::state(oracle::propagator(h, t) * oracle::vec(psi));
        return inner(psi_t, A.apply(psi_t)).real();
    };
    auto error = [&](double step) { return std::abs((expect_A(step) - expect_A(-step)) / (2.0 * step) - exact); };
    const double e1 = error(1e-3), e2 = error(5e-4);
    CHECK(e1 < 1e-4 * std::abs(exact) + 1e-8);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("Mourre constant shrinks on windows centered at the threshold") {
    const auto m = oracle::nelson(0.2);
    const MomentumGrid grid(1, 1024, 6.0);
    const double P[] = {0.5};
    const double sig = sigma_ess(m, P);
    const double off = mourre_constant(m, grid, P, P, sig + 0.8, 0.05).c_est;
    // centered windows sit at the grid floor set by the eigenvalue nearest the threshold
    double prev = 1e300;
    for (double kappa : {0.2, 0.1, 0.05}) {
        const auto r = mourre_constant(m, grid, P, P, sig, kappa);
        CHECK(r.threshold_in_window);
        CHECK(r.c_est <= 1e-3 * off);
        CHECK(r.c_est <= prev + 1e-6 * off);
        prev = r.c_est;
    }
    // windows [sig + kappa, sig + 3 kappa] approach the threshold strictly
    prev = 1e300;
    for (double kappa : {0.2, 0.1, 0.05, 0.025}) {
        const double c = mourre_constant(m, grid, P, P, sig + 2.0 * kappa, kappa).c_est;
        CHECK(c > 0.0);
        CHECK(c < prev);
        prev = c;
    }
}

TEST_CASE("decoupled Mourre constant is the minimal squared velocity in the window") {
    const auto m = oracle::nelson(0.0);
    const MomentumGrid grid(1, 1024, 6.0);
    const double P[] = {0.5};
    const double lambda = sigma_ess(m, P) + 0.8, kappa = 0.05;
    // brute force over the continuum shell
    double expect = 1e300;
    for (int i = 0; i <= 400000; ++i) {
        const double k = -6.0 + 12.0 * i / 400000.0;
        const double F = 0.5 * (P[0] - k) * (P[0] - k) + std::sqrt(k * k + 1.0);
        if (std::abs(F - lambda) > kappa) continue;
        const double v = k / std::sqrt(k * k + 1.0) + (k - P[0]);
        expect = std::min(expect, v * v);
    }
    const auto r = mourre_constant(m, grid, P, P, lambda, kappa);
    CHECK(r.c_est >= expect * (1.0 - 1e-12));
    CHECK(r.c_est <= 1.05 * expect);
}

TEST_CASE("Mourre constant is continuous in P") {
    const auto m = oracle::nelson(0.2);
    const MomentumGrid grid(1, 1024, 6.0);
    const double P0[] = {0.5};
    const double lambda = sigma_ess(m, P0) + 0.8;
    const double c0 = mourre_constant(m, grid, P0, P0, lambda, 0.05).c_est;
    for (double dp : {-0.05, -0.025, 0.025, 0.05}) {
        const double P[] = {0.5 + dp};
        const double c = mourre_constant(m, grid, P, P0, lambda, 0.05).c_est;
        CHECK(std::abs(c - c0) <= 0.2 * c0);
    }
}
