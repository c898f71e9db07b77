#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"

#include "fibscat/errors.hpp"
#include "fibscat/grid.hpp"
#include "oracles.hpp"

using namespace fibscat;

TEST_CASE("grid geometry") {
    const MomentumGrid g(1, 64, 4.0);
    CHECK(g.dk() == doctest::Approx(0.125));
    CHECK(g.box_length() == doctest::Approx(2.0 * std::numbers::pi / 0.125));
    CHECK(g.axis_momentum(0) == -4.0);
    CHECK(g.axis_momentum(32) == doctest::Approx(0.0));
    CHECK(g.axis_position(32) == doctest::Approx(0.0).epsilon(1e-14));
    const MomentumGrid g3(3, 8, 1.0);
    CHECK(g3.size() == 512);
    CHECK(g3.weight() == doctest::Approx(std::pow(0.25, 3)));
    CHECK(g3.axis_index(8 * 8 * 3 + 8 * 5 + 7, 0) == 3);
    CHECK(g3.axis_index(8 * 8 * 3 + 8 * 5 + 7, 1) == 5);
    CHECK(g3.axis_index(8 * 8 * 3 + 8 * 5 + 7, 2) == 7);
}

TEST_CASE("grid rejects invalid parameters") {
    CHECK_THROWS_AS(MomentumGrid(1, 2, 1.0), Error);
    CHECK_THROWS_AS(MomentumGrid(1, 63, 1.0), Error);
    CHECK_THROWS_AS(MomentumGrid(4, 8, 1.0), Error);
    CHECK_THROWS_AS(MomentumGrid(1, 8, -1.0), Error);
    CHECK_NOTHROW(MomentumGrid(1, 4, 1.0));
}

TEST_CASE("Fourier transform of a Gaussian matches the closed form") {
    // f(k) = exp(-k^2/2) has continuum transform exp(-x^2/2); with
    // orthonormal coefficients the position values are sqrt(dx) f(x_m).
    for (int nu : {1, 2}) {
        const MomentumGrid g(nu, nu == 1 ? 256 : 64, 12.0);
        auto s = sample_state(g, 0.0, [](std::span<const double> k) {
            double r2 = 0.0;
            for (double v : k) r2 += v * v;
            return std::exp(-0.5 * r2);
        });
        std::vector<cplx> pos(g.size());
        g.to_position(s.field, pos);
        const double sdx = std::pow(g.dx(), 0.5 * nu);
        double err = 0.0;
        for (std::size_t j = 0; j < g.size(); ++j) {
            const double x = g.position_norm(j);
            err = std::max(err, std::abs(pos[j] / sdx - std::exp(-0.5 * x * x)));
        }
        CHECK(err < 1e-12);
    }
}

TEST_CASE("shifted packet lands at its position center") {
    const MomentumGrid g(1, 512, 8.0);
    const auto p = oracle::packet(g, 0.0, 0.5, 10.0);
    std::vector<cplx> pos(g.size());
    g.to_position(p.field, pos);
    double mean = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) mean += g.position(j, 0) * std::norm(pos[j]);
    CHECK(mean == doctest::Approx(10.0).epsilon(1e-10));
}

TEST_CASE("transform is unitary and invertible") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> n01;
    for (int nu : {1, 2, 3}) {
        const MomentumGrid g(nu, nu == 3 ? 8 : 32, 3.0);
        std::vector<cplx> a(g.size()), pos(g.size()), back(g.size());
        for (auto& v : a) v = cplx(n01(rng), n01(rng));
        g.to_position(a, pos);
        g.to_momentum(pos, back);
        CHECK(norm2(pos) == doctest::Approx(norm2(a)).epsilon(1e-13));
        double err = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) err = std::max(err, std::abs(back[j] - a[j]));
        CHECK(err < 1e-12);
    }
}

TEST_CASE("state arithmetic and inner products") {
    FiberState a(cplx(1.0, 1.0), {cplx(1.0, 0.0), cplx(0.0, 2.0)});
    FiberState b(cplx(0.0, 1.0), {cplx(0.0, 1.0), cplx(1.0, 0.0)});
    CHECK(a.norm2() == doctest::Approx(7.0));
    const cplx ip = inner(a, b);
    // conj(1+i) i + conj(1) i + conj(2i) 1 = (1 - i) i + i - 2i = 1 + i + i - 2i
    CHECK(ip.real() == doctest::Approx(1.0));
    CHECK(ip.imag() == doctest::Approx(0.0));
    const auto c = a + b;
    CHECK(c.vacuum == cplx(1.0, 2.0));
    CHECK((c - b).field[1] == cplx(0.0, 2.0));
    CHECK_THROWS_AS(a += FiberState(3), Error);
}

TEST_CASE("state serialization round trips") {
    const MomentumGrid g(1, 16, 2.0);
    const auto p = oracle::packet(g, 0.3, 0.4, 1.0, cplx(0.25, -0.5));
    std::stringstream csv, bin;
    write_state_csv(csv, p);
    const auto q = read_state_csv(csv, g.size());
    CHECK(q.vacuum == p.vacuum);
    CHECK(q.field == p.field);
    write_state_binary(bin, p);
    const auto r = read_state_binary(bin, g.size());
    CHECK(r.field == p.field);
    std::stringstream bad;
    write_state_csv(bad, p);
    CHECK_THROWS_AS(read_state_csv(bad, 8), Error);
}

TEST_CASE("boundary mass sees packets near the box edge") {
    const MomentumGrid g(1, 512, 8.0);
    const double L = g.box_length();
    CHECK(boundary_mass(g, oracle::packet(g, 0.0, 0.5, 0.0)) < 1e-20);
    CHECK(boundary_mass(g, oracle::packet(g, 0.0, 0.5, 0.4 * L)) == doctest::Approx(1.0).epsilon(1e-10));
}
