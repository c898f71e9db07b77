#include <immintrin.h>

#include "fibscat/kernels.hpp"

namespace fibscat::kernels {

namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// Lane-wise partial sums are combined in a fixed order, so results are
// deterministic but not bitwise equal to the scalar loop.

double secular_sum(const double* poles, const double* w, std::size_t n, double base, double tau) {
    const __m256d vb = _mm256_set1_pd(base), vt = _mm256_set1_pd(tau);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_add_pd(_mm256_sub_pd(vb, _mm256_loadu_pd(poles + i)), vt);
        acc = _mm256_add_pd(acc, _mm256_div_pd(_mm256_loadu_pd(w + i), d));
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += w[i] / ((base - poles[i]) + tau);
    return s;
}

double secular_sum_sq(const double* poles, const double* w, std::size_t n, double base, double tau) {
    const __m256d vb = _mm256_set1_pd(base), vt = _mm256_set1_pd(tau);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_add_pd(_mm256_sub_pd(vb, _mm256_loadu_pd(poles + i)), vt);
        acc = _mm256_add_pd(acc, _mm256_div_pd(_mm256_loadu_pd(w + i), _mm256_mul_pd(d, d)));
    }
    double s = hsum(acc);
    for (; i < n; ++i) {
        const double d = (base - poles[i]) + tau;
        s += w[i] / (d * d);
    }
    return s;
}

void cauchy_dot(const double* poles, const double* re, const double* im, std::size_t n, double base, double tau,
                double* out) {
    const __m256d vb = _mm256_set1_pd(base), vt = _mm256_set1_pd(tau), one = _mm256_set1_pd(1.0);
    __m256d ar = _mm256_setzero_pd(), ai = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_add_pd(_mm256_sub_pd(vb, _mm256_loadu_pd(poles + i)), vt);
        const __m256d r = _mm256_div_pd(one, d);
        ar = _mm256_fmadd_pd(_mm256_loadu_pd(re + i), r, ar);
        ai = _mm256_fmadd_pd(_mm256_loadu_pd(im + i), r, ai);
    }
    double sr = hsum(ar), si = hsum(ai);
    for (; i < n; ++i) {
        const double r = 1.0 / ((base - poles[i]) + tau);
        sr += re[i] * r;
        si += im[i] * r;
    }
    out[0] = sr;
    out[1] = si;
}

void cauchy_dot_rows(const double* bases, const double* taus, const double* re, const double* im, std::size_t n,
                     double pole, double* out) {
    const __m256d vp = _mm256_set1_pd(pole), one = _mm256_set1_pd(1.0);
    __m256d ar = _mm256_setzero_pd(), ai = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_add_pd(_mm256_sub_pd(_mm256_loadu_pd(bases + i), vp), _mm256_loadu_pd(taus + i));
        const __m256d r = _mm256_div_pd(one, d);
        ar = _mm256_fmadd_pd(_mm256_loadu_pd(re + i), r, ar);
        ai = _mm256_fmadd_pd(_mm256_loadu_pd(im + i), r, ai);
    }
    double sr = hsum(ar), si = hsum(ai);
    for (; i < n; ++i) {
        const double r = 1.0 / ((bases[i] - pole) + taus[i]);
        sr += re[i] * r;
        si += im[i] * r;
    }
    out[0] = sr;
    out[1] = si;
}

double weighted_abs2_sum(const double* w, const double* re, const double* im, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d r = _mm256_loadu_pd(re + i), m = _mm256_loadu_pd(im + i);
        const __m256d a2 = _mm256_fmadd_pd(r, r, _mm256_mul_pd(m, m));
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), a2, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += w[i] * (re[i] * re[i] + im[i] * im[i]);
    return s;
}

}  // namespace

const KernelTable& avx2_kernels() noexcept {
    static const KernelTable table{"avx2", secular_sum, secular_sum_sq, cauchy_dot, cauchy_dot_rows,
                                   weighted_abs2_sum};
    return table;
}

}  // namespace fibscat::kernels
