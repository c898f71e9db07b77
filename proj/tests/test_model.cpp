#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "doctest.h"

#include "fibscat/errors.hpp"
#include "fibscat/grid.hpp"
#include "fibscat/model.hpp"
#include "oracles.hpp"

using namespace fibscat;

namespace {

double quad(auto f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-13);
}

DispersionModel cutoff_model(int nu) {
    Coupling rho;
    rho.family = CouplingFamily::smooth_cutoff;
    rho.g = 0.3;
    rho.sigma = 2.0;
    return DispersionModel(nu, {DispersionFamily::nonrelativistic, 1.0, 0.0},
                           {DispersionFamily::relativistic, 1.0, 0.0}, rho, 1.0);
}

}  // namespace

TEST_CASE("closed-form evaluations") {
    const auto m = oracle::nelson(0.1);
    const double eta[] = {2.0};
    CHECK(eval_model(m, Quantity::Omega, eta, Order::gradient).gradient[0] == doctest::Approx(2.0));
    const double zero[] = {0.0};
    CHECK(eval_model(m, Quantity::omega, zero, Order::gradient).gradient[0] == 0.0);
    CHECK(eval_model(m, Quantity::omega, zero, Order::value).value == doctest::Approx(1.0));
    const double one[] = {1.0};
    CHECK(eval_model(m, Quantity::rho_mom, one, Order::value).value == doctest::Approx(0.1 * std::exp(-0.5)));
}

TEST_CASE("Gaussian rho_hat agrees with the quadrature transform of rho") {
    const auto m = oracle::nelson(0.1);
    for (double k : {0.0, 0.5, 1.0, 2.0}) {
        // rho_hat(k) = (2 pi)^(-1/2) int rho(x) cos(k x) dx
        const double ft = quad([&](double x) { return m.rho_pos_radial(std::abs(x)) * std::cos(k * x); }, -40.0, 40.0) /
                          std::sqrt(2.0 * std::numbers::pi);
        CHECK(ft == doctest::Approx(m.rho_mom_radial(k)).epsilon(1e-10));
    }
}

TEST_CASE("smooth cutoff position profile agrees with direct quadrature") {
    const auto m = cutoff_model(1);
    for (double x : {0.0, 0.7, 3.0, 9.0}) {
        const double direct =
            quad([&](double k) { return m.rho_mom_radial(std::abs(k)) * std::cos(k * x); }, -2.0, 2.0) /
            std::sqrt(2.0 * std::numbers::pi);
        CHECK(m.rho_pos_radial(x) == doctest::Approx(direct).epsilon(1e-9).scale(1e-3));
    }
    const auto m3 = cutoff_model(3);
    for (double r : {0.5, 2.0}) {
        // radial transform in 3-d: (2 pi)^(-3/2) 4 pi int k^2 rho_hat(k) sin(kr)/(kr) dk
        const double direct = quad([&](double k) { return k * k * m3.rho_mom_radial(k) * std::sin(k * r) / (k * r); },
                                   0.0, 2.0) *
                              4.0 * std::numbers::pi / std::pow(2.0 * std::numbers::pi, 1.5);
        CHECK(m3.rho_pos_radial(r) == doctest::Approx(direct).epsilon(1e-9));
    }
}

TEST_CASE("Fourier consistency on an N=1024 grid") {
    const auto m = oracle::nelson(0.1);
    const MomentumGrid g(1, 1024, 16.0);
    auto s = sample_state(g, 0.0, [&](std::span<const double> k) { return m.rho_mom_radial(std::abs(k[0])); });
    std::vector<cplx> pos(g.size());
    g.to_position(s.field, pos);
    const double sdx = std::sqrt(g.dx());
    double err = 0.0, ref = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double x = std::abs(g.position(j, 0));
        if (x > 0.25 * g.box_length()) continue;
        err = std::max(err, std::abs(pos[j] / sdx - m.rho_pos_radial(x)));
        ref = std::max(ref, std::abs(m.rho_pos_radial(x)));
    }
    CHECK(err / ref < 1e-8);
}

TEST_CASE("gradients match central differences and are radial") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int nu : {1, 2, 3}) {
        const auto m = oracle::gaussian_model(nu, 0.2, 1.3, DispersionFamily::relativistic,
                                              DispersionFamily::relativistic, 0.7, 1.4);
        for (Quantity q : {Quantity::Omega, Quantity::omega, Quantity::rho_pos, Quantity::rho_mom}) {
            for (int trial = 0; trial < 5; ++trial) {
                std::vector<double> x(static_cast<std::size_t>(nu));
                for (auto& v : x) v = u(rng);
                const auto grad = eval_model(m, q, x, Order::gradient).gradient;
                const double h = 1e-5;
                for (int a = 0; a < nu; ++a) {
                    auto xp = x, xm = x;
                    xp[static_cast<std::size_t>(a)] += h;
                    xm[static_cast<std::size_t>(a)] -= h;
                    const double fd = (eval_model(m, q, xp, Order::value).value -
                                       eval_model(m, q, xm, Order::value).value) /
                                      (2.0 * h);
                    CHECK(grad[static_cast<std::size_t>(a)] == doctest::Approx(fd).epsilon(1e-7).scale(1.0));
                }
                auto flipped = x;
                for (auto& v : flipped) v = -v;
                CHECK(eval_model(m, q, flipped, Order::value).value == eval_model(m, q, x, Order::value).value);
            }
        }
    }
}

TEST_CASE("hessian matches differences of the gradient") {
    const auto m = oracle::gaussian_model(2, 0.2, 1.0, DispersionFamily::nonrelativistic,
                                          DispersionFamily::relativistic);
    const std::vector<double> x{0.4, -0.9};
    for (Quantity q : {Quantity::Omega, Quantity::omega, Quantity::rho_pos, Quantity::rho_mom}) {
        const auto hess = eval_model(m, q, x, Order::hessian).hessian;
        const double h = 1e-5;
        for (int b = 0; b < 2; ++b) {
            auto xp = x, xm = x;
            xp[static_cast<std::size_t>(b)] += h;
            xm[static_cast<std::size_t>(b)] -= h;
            const auto gp = eval_model(m, q, xp, Order::gradient).gradient;
            const auto gm = eval_model(m, q, xm, Order::gradient).gradient;
            for (int a = 0; a < 2; ++a)
                CHECK(hess[static_cast<std::size_t>(a * 2 + b)] ==
                      doctest::Approx((gp[static_cast<std::size_t>(a)] - gm[static_cast<std::size_t>(a)]) / (2 * h))
                          .epsilon(1e-6)
                          .scale(1.0));
        }
    }
    const auto c = cutoff_model(2);
    CHECK_THROWS_AS(eval_model(c, Quantity::rho_pos, x, Order::hessian), Error);
}

TEST_CASE("configuration errors") {
    CHECK_THROWS_AS(parse_dispersion_family("massless"), Error);
    CHECK_THROWS_AS(parse_coupling_family("yukawa"), Error);
    CHECK_THROWS_AS(oracle::gaussian_model(4, 0.1, 1.0, DispersionFamily::nonrelativistic,
                                           DispersionFamily::relativistic),
                    Error);
    const auto m = oracle::nelson();
    const double two[] = {1.0, 2.0};
    CHECK_THROWS_AS(eval_model(m, Quantity::Omega, two, Order::value), Error);
}

TEST_CASE("validate_conditions on the standard choices") {
    const auto m = oracle::nelson();
    const auto r = validate_conditions(m);
    CHECK(r.all_pass());
    CHECK(r.find("3.iii") != nullptr);
}

TEST_CASE("bounded Omega with constant omega fails 2.ii") {
    const DispersionModel m(1, {DispersionFamily::constant, 1.0, 0.5}, {DispersionFamily::constant, 1.0, 1.0},
                            Coupling{}, 1.0);
    const auto r = validate_conditions(m);
    REQUIRE(r.find("2.ii") != nullptr);
    CHECK_FALSE(r.find("2.ii")->pass);
    CHECK_FALSE(r.all_pass());
}

TEST_CASE("slowly decaying rho fails 3.iii") {
    Coupling rho;
    rho.family = CouplingFamily::power;
    rho.g = 0.1;
    rho.decay = 1.0;
    const DispersionModel m(1, {DispersionFamily::nonrelativistic, 1.0, 0.0},
                            {DispersionFamily::relativistic, 1.0, 0.0}, rho, 1.0);
    const auto r = validate_conditions(m);
    REQUIRE(r.find("3.iii") != nullptr);
    CHECK_FALSE(r.find("3.iii")->pass);
}

TEST_CASE("rho norm and tail mass against quadrature") {
    for (int nu : {1, 2, 3}) {
        const auto m = oracle::gaussian_model(nu, 0.3, 1.5, DispersionFamily::nonrelativistic,
                                              DispersionFamily::relativistic);
        const double area = unit_sphere_area(nu);
        const double norm = area * quad([&](double k) { return std::pow(k, nu - 1) * std::pow(m.rho_mom_radial(k), 2); },
                                        0.0, 30.0);
        CHECK(m.rho_norm2() == doctest::Approx(norm).epsilon(1e-10));
        const double tail = area * quad([&](double k) { return std::pow(k, nu - 1) * std::pow(m.rho_mom_radial(k), 2); },
                                        2.0, 30.0);
        CHECK(m.rho_mom_tail_mass(2.0) == doctest::Approx(tail).epsilon(1e-9));
    }
}
