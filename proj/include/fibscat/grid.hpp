#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace fibscat {

using cplx = std::complex<double>;

namespace detail {
struct FftPlan;
}

/// Uniform lattice k_j = -k_max + j dk per axis, with the dual periodic
/// position box x_m = -L/2 + m dx, L = 2 pi / dk. Points are ordered
/// lexicographically (last axis fastest).
class MomentumGrid {
public:
    MomentumGrid(int nu, int n_per_axis, double k_max);

    int nu() const noexcept { return nu_; }
    int n_per_axis() const noexcept { return n_; }
    double k_max() const noexcept { return k_max_; }
    double dk() const noexcept { return dk_; }
    double box_length() const noexcept { return length_; }
    double dx() const noexcept { return dx_; }
    /// Quadrature weight dk^nu.
    double weight() const noexcept { return weight_; }
    std::size_t size() const noexcept { return size_; }

    double axis_momentum(int j) const noexcept { return -k_max_ + j * dk_; }
    double axis_position(int m) const noexcept { return -0.5 * length_ + m * dx_; }
    /// Per-axis index of a flat point index.
    int axis_index(std::size_t flat, int axis) const noexcept;
    double momentum(std::size_t flat, int axis) const noexcept { return axis_momentum(axis_index(flat, axis)); }
    double position(std::size_t flat, int axis) const noexcept { return axis_position(axis_index(flat, axis)); }
    void momentum(std::size_t flat, std::span<double> out) const noexcept;
    void position(std::size_t flat, std::span<double> out) const noexcept;
    double momentum_norm(std::size_t flat) const noexcept;
    double position_norm(std::size_t flat) const noexcept;

    /// Unitary transform between orthonormal momentum and position
    /// coefficients (the discretized continuum Fourier transform).
    void to_position(std::span<const cplx> mom, std::span<cplx> pos) const;
    void to_momentum(std::span<const cplx> pos, std::span<cplx> mom) const;

    bool same_as(const MomentumGrid& other) const noexcept {
        return nu_ == other.nu_ && n_ == other.n_ && k_max_ == other.k_max_;
    }

private:
    void transform(std::span<const cplx> in, std::span<cplx> out, bool forward) const;

    int nu_;
    int n_;
    double k_max_;
    double dk_;
    double length_;
    double dx_;
    double weight_;
    std::size_t size_;
    std::shared_ptr<const detail::FftPlan> plan_;
};

MomentumGrid build_grid(int nu, int n_per_axis, double k_max);

/// Element of C + L^2: vacuum amplitude plus the field on the grid. The
/// field holds orthonormal coefficients sqrt(w) f(k_j), so plain Euclidean
/// inner products discretize the continuum ones.
struct FiberState {
    cplx vacuum{0.0, 0.0};
    std::vector<cplx> field;

    FiberState() = default;
    explicit FiberState(std::size_t n) : field(n) {}
    FiberState(cplx vac, std::vector<cplx> f) : vacuum(vac), field(std::move(f)) {}

    std::size_t size() const noexcept { return field.size(); }
    double norm2() const noexcept;
    double norm() const noexcept;

    FiberState& operator+=(const FiberState& o);
    FiberState& operator-=(const FiberState& o);
    FiberState& operator*=(cplx a);
};

FiberState operator+(FiberState a, const FiberState& b);
FiberState operator-(FiberState a, const FiberState& b);
FiberState operator*(cplx a, FiberState b);

cplx inner(const FiberState& a, const FiberState& b);
/// Conjugate-linear in the first argument.
cplx inner(std::span<const cplx> a, std::span<const cplx> b) noexcept;
double norm2(std::span<const cplx> a) noexcept;

/// Samples a continuum momentum function f as orthonormal coefficients.
template <class F>
FiberState sample_state(const MomentumGrid& grid, cplx vacuum, F&& f) {
    FiberState s(grid.size());
    s.vacuum = vacuum;
    std::vector<double> k(static_cast<std::size_t>(grid.nu()));
    const double sw = std::sqrt(grid.weight());
    for (std::size_t j = 0; j < grid.size(); ++j) {
        grid.momentum(j, k);
        s.field[j] = sw * cplx(f(std::span<const double>(k)));
    }
    return s;
}

/// Mass of the field in |x| > fraction * L (position representation).
double boundary_mass(const MomentumGrid& grid, const FiberState& psi, double fraction = 0.25);

/// Multiplies the field by m(x_j) in position representation.
template <class M>
void multiply_position(const MomentumGrid& grid, std::span<cplx> field, M&& m) {
    std::vector<cplx> pos(field.size());
    grid.to_position(field, pos);
    for (std::size_t j = 0; j < pos.size(); ++j) pos[j] *= m(j);
    grid.to_momentum(pos, field);
}

void write_state_csv(std::ostream& os, const FiberState& s);
FiberState read_state_csv(std::istream& is, std::size_t expected_size);
void write_state_binary(std::ostream& os, const FiberState& s);
FiberState read_state_binary(std::istream& is, std::size_t expected_size);

}  // namespace fibscat
