#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace fibscat {

/// Dense Hermitian eigenproblem; `matrix` is n x n row-major and is consumed.
/// Eigenvalues ascend; eigenvector i is column i of the returned row-major
/// n x n array.
struct DenseEigen {
    std::vector<double> values;
    std::vector<std::complex<double>> vectors;
};

DenseEigen hermitian_eigen(std::vector<std::complex<double>> matrix, std::size_t n, bool want_vectors = true);

/// Deterministic pairwise (cascade) summation.
double pairwise_sum(const double* x, std::size_t n) noexcept;
inline double pairwise_sum(std::span<const double> x) noexcept { return pairwise_sum(x.data(), x.size()); }

}  // namespace fibscat
