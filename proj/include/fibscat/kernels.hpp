#pragma once

#include <cstddef>
#include <string_view>

// Hot loops of the secular solver. Every routine has a scalar reference
// implementation; an AVX2/FMA table is used when the CPU supports it.
// FIBSCAT_SIMD=scalar|avx2|auto overrides the runtime choice.

namespace fibscat::kernels {

struct KernelTable {
    std::string_view name;

    /// sum_i w[i] / ((base - poles[i]) + tau)
    double (*secular_sum)(const double* poles, const double* w, std::size_t n, double base, double tau);
    /// sum_i w[i] / ((base - poles[i]) + tau)^2
    double (*secular_sum_sq)(const double* poles, const double* w, std::size_t n, double base, double tau);
    /// sum_i (re[i] + i im[i]) / ((base - poles[i]) + tau), result in out[0..1]
    void (*cauchy_dot)(const double* poles, const double* re, const double* im, std::size_t n, double base,
                       double tau, double* out);
    /// sum_i (re[i] + i im[i]) / ((bases[i] - pole) + taus[i]), result in out[0..1]
    void (*cauchy_dot_rows)(const double* bases, const double* taus, const double* re, const double* im,
                            std::size_t n, double pole, double* out);
    /// sum_i w[i] (re[i]^2 + im[i]^2)
    double (*weighted_abs2_sum)(const double* w, const double* re, const double* im, std::size_t n);
};

const KernelTable& scalar_table() noexcept;
/// nullptr when the binary or the CPU lacks AVX2/FMA.
const KernelTable* avx2_table() noexcept;
/// Table chosen at first use (environment override, then cpuid).
const KernelTable& active() noexcept;

}  // namespace fibscat::kernels
