#include "fibscat/kernels.hpp"

namespace fibscat::kernels {

namespace {

double secular_sum(const double* poles, const double* w, std::size_t n, double base, double tau) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += w[i] / ((base - poles[i]) + tau);
    return s;
}

double secular_sum_sq(const double* poles, const double* w, std::size_t n, double base, double tau) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = (base - poles[i]) + tau;
        s += w[i] / (d * d);
    }
    return s;
}

void cauchy_dot(const double* poles, const double* re, const double* im, std::size_t n, double base, double tau,
                double* out) {
    double sr = 0.0, si = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = 1.0 / ((base - poles[i]) + tau);
        sr += re[i] * r;
        si += im[i] * r;
    }
    out[0] = sr;
    out[1] = si;
}

void cauchy_dot_rows(const double* bases, const double* taus, const double* re, const double* im, std::size_t n,
                     double pole, double* out) {
    double sr = 0.0, si = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = 1.0 / ((bases[i] - pole) + taus[i]);
        sr += re[i] * r;
        si += im[i] * r;
    }
    out[0] = sr;
    out[1] = si;
}

double weighted_abs2_sum(const double* w, const double* re, const double* im, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += w[i] * (re[i] * re[i] + im[i] * im[i]);
    return s;
}

}  // namespace

const KernelTable& scalar_table() noexcept {
    static const KernelTable table{"scalar", secular_sum, secular_sum_sq, cauchy_dot, cauchy_dot_rows,
                                   weighted_abs2_sum};
    return table;
}

}  // namespace fibscat::kernels
