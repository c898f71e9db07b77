#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

#include "fibscat/kernels.hpp"

using namespace fibscat::kernels;

namespace {

struct Data {
    std::vector<double> poles, w, re, im, bases, taus;
};

Data make_data(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Data d;
    for (std::size_t i = 0; i < n; ++i) {
        d.poles.push_back(1.0 + 3.0 * u(rng));
        d.w.push_back(u(rng) * 1e-3);
        d.re.push_back(u(rng) - 0.5);
        d.im.push_back(u(rng) - 0.5);
        d.bases.push_back(0.5 + 4.0 * u(rng));
        d.taus.push_back(1e-3 * (u(rng) - 0.5));
    }
    return d;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1e-300, std::max(std::abs(a), std::abs(b))); }

}  // namespace

TEST_CASE("scalar kernels against plain loops") {
    const auto& k = scalar_table();
    const auto d = make_data(37, 1);
    double s = 0.0, s2 = 0.0, dr = 0.0, di = 0.0, a2 = 0.0;
    for (std::size_t i = 0; i < d.poles.size(); ++i) {
        const double den = (0.2 - d.poles[i]) + 0.01;
        s += d.w[i] / den;
        s2 += d.w[i] / (den * den);
        dr += d.re[i] / den;
        di += d.im[i] / den;
        a2 += d.w[i] * (d.re[i] * d.re[i] + d.im[i] * d.im[i]);
    }
    CHECK(rel(k.secular_sum(d.poles.data(), d.w.data(), d.poles.size(), 0.2, 0.01), s) < 1e-14);
    CHECK(rel(k.secular_sum_sq(d.poles.data(), d.w.data(), d.poles.size(), 0.2, 0.01), s2) < 1e-14);
    double out[2];
    k.cauchy_dot(d.poles.data(), d.re.data(), d.im.data(), d.poles.size(), 0.2, 0.01, out);
    CHECK(rel(out[0], dr) < 1e-14);
    CHECK(rel(out[1], di) < 1e-14);
    CHECK(rel(k.weighted_abs2_sum(d.w.data(), d.re.data(), d.im.data(), d.w.size()), a2) < 1e-14);
}

TEST_CASE("AVX2 kernels agree with the scalar reference") {
    const KernelTable* v = avx2_table();
    if (!v) {
        MESSAGE("AVX2 not available on this machine; equivalence test skipped");
        return;
    }
    const auto& s = scalar_table();
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 8u, 17u, 1000u, 4099u}) {
        const auto d = make_data(n, static_cast<unsigned>(n + 11));
        CHECK(rel(v->secular_sum(d.poles.data(), d.w.data(), n, 0.3, 1e-4),
                  s.secular_sum(d.poles.data(), d.w.data(), n, 0.3, 1e-4)) < 1e-12);
        CHECK(rel(v->secular_sum_sq(d.poles.data(), d.w.data(), n, 0.3, 1e-4),
                  s.secular_sum_sq(d.poles.data(), d.w.data(), n, 0.3, 1e-4)) < 1e-12);
        double a[2], b[2];
        v->cauchy_dot(d.poles.data(), d.re.data(), d.im.data(), n, 0.3, 1e-4, a);
        s.cauchy_dot(d.poles.data(), d.re.data(), d.im.data(), n, 0.3, 1e-4, b);
        const double scale = std::max({1.0, std::abs(b[0]), std::abs(b[1])});
        CHECK(std::abs(a[0] - b[0]) < 1e-12 * scale * std::sqrt(static_cast<double>(n + 1)) * 10);
        CHECK(std::abs(a[1] - b[1]) < 1e-12 * scale * std::sqrt(static_cast<double>(n + 1)) * 10);
        v->cauchy_dot_rows(d.bases.data(), d.taus.data(), d.re.data(), d.im.data(), n, 2.0, a);
        s.cauchy_dot_rows(d.bases.data(), d.taus.data(), d.re.data(), d.im.data(), n, 2.0, b);
        const double scale2 = std::max({1.0, std::abs(b[0]), std::abs(b[1])});
        CHECK(std::abs(a[0] - b[0]) < 1e-10 * scale2);
        CHECK(std::abs(a[1] - b[1]) < 1e-10 * scale2);
        CHECK(rel(v->weighted_abs2_sum(d.w.data(), d.re.data(), d.im.data(), n),
                  s.weighted_abs2_sum(d.w.data(), d.re.data(), d.im.data(), n)) < 1e-12);
    }
}

TEST_CASE("active table honours the environment override") {
    const auto& a = active();
    CHECK((a.name == "scalar" || a.name == "avx2"));
}
