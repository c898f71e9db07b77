#include <cmath>

#include "doctest.h"

#include "fibscat/errors.hpp"
#include "fibscat/spectral.hpp"
#include "fibscat/thresholds.hpp"
#include "oracles.hpp"

using namespace fibscat;

namespace {

// sign changes of the axis gradient mismatch on a fine uniform grid, refined by bisection
std::vector<double> brute_roots(const DispersionModel& m, double P, double radius) {
    auto g = [&](double t) { return m.matter().axial_d1(P - t) - m.field().axial_d1(t); };
    std::vector<double> roots;
    const int n = 400001;
    double prev_t = -radius, prev = g(prev_t);
    for (int i = 1; i < n; ++i) {
        const double t = -radius + 2.0 * radius * i / (n - 1);
        const double v = g(t);
        if ((prev < 0.0) != (v < 0.0)) {
            double a = prev_t, b = t;
            for (int k = 0; k < 200; ++k) {
                const double c = 0.5 * (a + b);
                if ((g(a) < 0.0) == (g(c) < 0.0)) a = c; else b = c;
            }
            roots.push_back(0.5 * (a + b));
        }
        prev = v;
        prev_t = t;
    }
    return roots;
}

}  // namespace

TEST_CASE("polaron thresholds: one critical energy at k = P") {
    const auto m = oracle::polaron();
    for (double p : {0.0, 0.5, 1.7}) {
        const double P[] = {p};
        const auto th = threshold_set(m, P);
        REQUIRE(th.energies.size() == 1);
        CHECK(th.energies[0] == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(th.witnesses[0].k[0] == doctest::Approx(p).epsilon(1e-12));
    }
}

TEST_CASE("threshold energies match a brute-force root scan") {
    for (const auto& m : {oracle::nelson(), oracle::relativistic()}) {
        for (double p : {0.0, 0.4, 1.3, 3.0}) {
            const double P[] = {p};
            const auto th = threshold_set(m, P);
            const auto roots = brute_roots(m, p, 2.0 * p + 32.0);
            std::vector<double> expect;
            for (double t : roots) expect.push_back(m.matter().radial(std::abs(p - t)) + m.field().radial(std::abs(t)));
            std::sort(expect.begin(), expect.end());
            expect.erase(std::unique(expect.begin(), expect.end(),
                                     [](double a, double b) { return std::abs(a - b) < 1e-9; }),
                         expect.end());
            REQUIRE(th.energies.size() == expect.size());
            for (std::size_t i = 0; i < expect.size(); ++i)
                CHECK(th.energies[i] == doctest::Approx(expect[i]).epsilon(1e-10));
        }
    }
}

TEST_CASE("minimum threshold equals Sigma_ess") {
    for (const auto& m : {oracle::polaron(), oracle::nelson(), oracle::relativistic()}) {
        for (int i = 0; i < 8; ++i) {
            const double P[] = {0.4 * i};
            const auto th = threshold_set(m, P);
            REQUIRE_FALSE(th.energies.empty());
            CHECK(std::abs(th.energies.front() - sigma_ess(m, P)) <= 1e-8);
        }
    }
}

TEST_CASE("cardinality is stable under scan refinement") {
    const auto m = oracle::nelson();
    const double P[] = {1.1};
    ThresholdOptions a, b;
    a.initial_intervals = 2048;
    b.initial_intervals = 8192;
    CHECK(threshold_set(m, P, a).energies.size() == threshold_set(m, P, b).energies.size());
}

TEST_CASE("two flat families give a single degenerate energy") {
    const DispersionModel m(1, {DispersionFamily::constant, 1.0, 0.5}, {DispersionFamily::constant, 1.0, 1.0},
                            Coupling{}, 1.0);
    const double P[] = {0.3};
    const auto th = threshold_set(m, P);
    REQUIRE(th.energies.size() == 1);
    CHECK(th.energies[0] == doctest::Approx(1.5));
    CHECK(th.witnesses[0].kind == WitnessKind::degenerate_ring);
}

TEST_CASE("threshold witnesses are critical points in 2-d") {
    const auto m = oracle::gaussian_model(2, 0.2, 1.0, DispersionFamily::nonrelativistic,
                                          DispersionFamily::relativistic);
    const double P[] = {0.6, 0.8};
    const auto th = threshold_set(m, P);
    for (const auto& w : th.witnesses) {
        double v[2];
        group_velocity(m, P, w.k, v);
        CHECK(std::hypot(v[0], v[1]) < 1e-10);
    }
    const double bad[] = {1.0};
    CHECK_THROWS_AS(threshold_set(m, bad), Error);
}
