#include "fibscat/linalg.hpp"

#include <lapacke.h>

#include <string>

#include "fibscat/errors.hpp"

namespace fibscat {

DenseEigen hermitian_eigen(std::vector<std::complex<double>> matrix, std::size_t n, bool want_vectors) {
    if (matrix.size() != n * n) fail(ErrorKind::dimension, "matrix is not n x n");
    DenseEigen out;
    out.values.resize(n);
    if (n == 0) return out;
    // Row-major input; the Hermitian conjugate is read by LAPACK as the lower triangle.
    const lapack_int info = LAPACKE_zheevd(LAPACK_ROW_MAJOR, want_vectors ? 'V' : 'N', 'U',
                                           static_cast<lapack_int>(n),
                                           reinterpret_cast<lapack_complex_double*>(matrix.data()),
                                           static_cast<lapack_int>(n), out.values.data());
    if (info != 0) fail(ErrorKind::numerical, "zheevd failed with info " + std::to_string(info));
    if (want_vectors) out.vectors = std::move(matrix);
    return out;
}

double pairwise_sum(const double* x, std::size_t n) noexcept {
    if (n <= 16) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    const std::size_t h = n / 2;
    return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

}  // namespace fibscat
