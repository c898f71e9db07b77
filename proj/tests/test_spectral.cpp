#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include "doctest.h"

#include "fibscat/errors.hpp"
#include "fibscat/spectral.hpp"
#include "oracles.hpp"

using namespace fibscat;

namespace {

// brute-force minimum of Omega(P - k) + omega(k) along the axis through P
double brute_sigma(const DispersionModel& m, double P) {
    double best = 1e300, bt = 0.0;
    for (int i = 0; i <= 200000; ++i) {
        const double t = -20.0 + 40.0 * i / 200000.0;
        const double v = m.matter().radial(std::abs(P - t)) + m.field().radial(std::abs(t));
        if (v < best) {
            best = v;
            bt = t;
        }
    }
    const auto r = boost::math::tools::brent_find_minima(
        [&](double t) { return m.matter().radial(std::abs(P - t)) + m.field().radial(std::abs(t)); }, bt - 1e-3,
        bt + 1e-3, 52);
    return r.second;
}

}  // namespace

TEST_CASE("Sigma_ess closed forms and brute force") {
    const double P[] = {0.7};
    CHECK(sigma_ess(oracle::polaron(), P) == doctest::Approx(1.0).epsilon(1e-14));
    const double zero[] = {0.0};
    CHECK(sigma_ess(oracle::nelson(), zero) == doctest::Approx(1.0).epsilon(1e-14));
    for (double p : {0.3, 1.0, 2.5, 5.0}) {
        const double Pp[] = {p};
        CHECK(sigma_ess(oracle::nelson(), Pp) == doctest::Approx(brute_sigma(oracle::nelson(), p)).epsilon(1e-12));
        CHECK(sigma_ess(oracle::relativistic(), Pp) ==
              doctest::Approx(brute_sigma(oracle::relativistic(), p)).epsilon(1e-12));
    }
    // relativistic pair: minimum at k = P/2, value 2 sqrt(P^2/4 + 1)
    const double Pr[] = {3.0};
    CHECK(sigma_ess(oracle::relativistic(), Pr) == doctest::Approx(2.0 * std::sqrt(2.25 + 1.0)).epsilon(1e-13));
}

TEST_CASE("Sigma_ess is rotation invariant in 2-d") {
    const auto m = oracle::gaussian_model(2, 0.2, 1.0, DispersionFamily::nonrelativistic,
                                          DispersionFamily::relativistic);
    const double a[] = {1.2, 0.0}, b[] = {0.0, -1.2}, c[] = {1.2 / std::sqrt(2.0), 1.2 / std::sqrt(2.0)};
    CHECK(sigma_ess(m, a) == doctest::Approx(sigma_ess(m, b)).epsilon(1e-13));
    CHECK(sigma_ess(m, a) == doctest::Approx(sigma_ess(m, c)).epsilon(1e-12));
}

TEST_CASE("mass shell without coupling is Omega(P) below the band") {
    const auto m = oracle::nelson(0.0);
    const MomentumGrid grid(1, 256, 8.0);
    const double P[] = {0.5};
    const auto shell = mass_shell(m, grid, P);
    REQUIRE(shell.has_value());
    CHECK(shell->energy == doctest::Approx(0.125));
    const double far[] = {4.0};  // Omega = 8 > Sigma_ess
    CHECK_FALSE(mass_shell(m, grid, far).has_value());
}

TEST_CASE("mass shell is an eigenvector of the dense matrix") {
    const auto m = oracle::nelson(0.5);
    const MomentumGrid grid(1, 128, 8.0);
    const double P[] = {0.3};
    const auto op = assemble_fiber(m, grid, P);
    const auto shell = mass_shell(op, sigma_ess(m, P));
    REQUIRE(shell.has_value());
    const Eigen::MatrixXcd h = oracle::dense(op);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    CHECK(shell->energy == doctest::Approx(es.eigenvalues()(0)).epsilon(1e-12));
    const auto v = oracle::vec(shell->state);
    CHECK((h * v - shell->energy * v).norm() < 1e-10);
    CHECK(shell->state.norm() == doctest::Approx(1.0));
}

TEST_CASE("second-order perturbation law for the mass shell") {
    const double g = 0.01;
    const auto m1 = oracle::polaron(1.0);
    const auto m = oracle::polaron(g);
    const MomentumGrid grid(1, 2048, 4.0);
    for (double p : {0.0, 0.3, 0.6}) {
        const double P[] = {p};
        const double Om = 0.5 * p * p;
        // I2 = int |rho_hat_1(k)|^2 / (F_P(k) - Omega(P)) dk
        const double I2 = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            [&](double k) {
                const double r = m1.rho_mom_radial(std::abs(k));
                return r * r / (1.0 + 0.5 * (p - k) * (p - k) - Om);
            },
            -12.0, 12.0, 15, 1e-13);
        const auto shell = mass_shell(m, grid, P);
        REQUIRE(shell.has_value());
        const double shift = shell->energy - Om;
        CHECK(std::abs(shift + g * g * I2) / (g * g * I2) < 0.01);
    }
}

TEST_CASE("Weyl residual shrinks as the bump narrows") {
    const auto m = oracle::nelson(0.01);
    const MomentumGrid grid(1, 4096, 12.0);
    const double P[] = {0.4};
    const double lambda = sigma_ess(m, P) + 0.3;
    double prev = 1e300;
    for (double n : {2.0, 4.0, 8.0, 16.0}) {
        const double r = weyl_residual(m, grid, P, lambda, n);
        CHECK(r < prev);
        prev = r;
    }
    CHECK_THROWS_AS(weyl_residual(m, grid, P, sigma_ess(m, P) - 0.5, 4.0), Error);
}

TEST_CASE("atlas with zero coupling") {
    const auto m = oracle::nelson(0.0);
    const MomentumGrid grid(1, 256, 8.0);
    const std::vector<std::vector<double>> Ps{{0.0}, {0.5}, {2.0}, {6.0}};
    const auto atlas = spectral_atlas(m, grid, Ps);
    REQUIRE(atlas.entries.size() == 4);
    for (const auto& e : atlas.entries) {
        CHECK(e.ok);
        const double Om = 0.5 * e.P[0] * e.P[0];
        if (Om < e.sigma_ess) {
            REQUIRE(e.E0.has_value());
            CHECK(*e.E0 == doctest::Approx(Om));
        } else {
            CHECK_FALSE(e.E0.has_value());
        }
        CHECK(e.eigenvalues_below.size() <= 1);
    }
}
