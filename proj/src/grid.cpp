#include "fibscat/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "fibscat/errors.hpp"

namespace fibscat {

namespace detail {

struct FftPlan {
    fftw_plan forward = nullptr;   // e^{-2 pi i jm/N}
    fftw_plan backward = nullptr;  // e^{+2 pi i jm/N}
    std::vector<double> parity;    // (-1)^(sum of axis indices)
    double scale = 1.0;            // sign(i^N)^nu / sqrt(N^nu)
};

}  // namespace detail

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

// Plans are cached for the life of the process; FFTW planning is not
// thread-safe, execution with fftw_execute_dft is.
std::shared_ptr<const detail::FftPlan> plan_for(int nu, int n) {
    static std::map<std::pair<int, int>, std::shared_ptr<const detail::FftPlan>> cache;
    std::lock_guard lock(planner_mutex());
    auto it = cache.find({nu, n});
    if (it != cache.end()) return it->second;

    auto plan = std::make_shared<detail::FftPlan>();
    std::size_t total = 1;
    for (int a = 0; a < nu; ++a) total *= static_cast<std::size_t>(n);
    std::vector<int> dims(static_cast<std::size_t>(nu), n);
    fftw_complex* buf = fftw_alloc_complex(total);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    plan->forward = fftw_plan_dft(nu, dims.data(), buf, buf, FFTW_FORWARD, flags);
    plan->backward = fftw_plan_dft(nu, dims.data(), buf, buf, FFTW_BACKWARD, flags);
    fftw_free(buf);
    if (!plan->forward || !plan->backward) fail(ErrorKind::numerical, "FFTW planning failed");

    plan->parity.resize(total);
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rest = flat;
        int sum = 0;
        for (int a = 0; a < nu; ++a) {
            sum += static_cast<int>(rest % static_cast<std::size_t>(n));
            rest /= static_cast<std::size_t>(n);
        }
        plan->parity[flat] = (sum % 2 == 0) ? 1.0 : -1.0;
    }
    // i^N = (-1)^(N/2) for even N
    const double axis_sign = ((n / 2) % 2 == 0) ? 1.0 : -1.0;
    plan->scale = std::pow(axis_sign, nu) / std::sqrt(static_cast<double>(total));
    cache.emplace(std::make_pair(nu, n), plan);
    return plan;
}

}  // namespace

MomentumGrid::MomentumGrid(int nu, int n_per_axis, double k_max) : nu_(nu), n_(n_per_axis), k_max_(k_max) {
    if (nu < 1 || nu > 3) fail(ErrorKind::configuration, "grid dimension must be 1, 2 or 3");
    if (n_per_axis < 4 || n_per_axis % 2 != 0)
        fail(ErrorKind::configuration, "grid.n must be even and at least 4");
    if (!(k_max > 0.0) || !std::isfinite(k_max)) fail(ErrorKind::configuration, "grid.kmax must be positive");
    dk_ = 2.0 * k_max / n_per_axis;
    length_ = 2.0 * std::numbers::pi / dk_;
    dx_ = length_ / n_per_axis;
    weight_ = std::pow(dk_, nu);
    size_ = 1;
    for (int a = 0; a < nu; ++a) size_ *= static_cast<std::size_t>(n_per_axis);
    plan_ = plan_for(nu, n_per_axis);
}

int MomentumGrid::axis_index(std::size_t flat, int axis) const noexcept {
    // last axis varies fastest
    for (int a = nu_ - 1; a > axis; --a) flat /= static_cast<std::size_t>(n_);
    return static_cast<int>(flat % static_cast<std::size_t>(n_));
}

void MomentumGrid::momentum(std::size_t flat, std::span<double> out) const noexcept {
    for (int a = nu_ - 1; a >= 0; --a) {
        out[static_cast<std::size_t>(a)] = axis_momentum(static_cast<int>(flat % static_cast<std::size_t>(n_)));
        flat /= static_cast<std::size_t>(n_);
    }
}

void MomentumGrid::position(std::size_t flat, std::span<double> out) const noexcept {
    for (int a = nu_ - 1; a >= 0; --a) {
        out[static_cast<std::size_t>(a)] = axis_position(static_cast<int>(flat % static_cast<std::size_t>(n_)));
        flat /= static_cast<std::size_t>(n_);
    }
}

double MomentumGrid::momentum_norm(std::size_t flat) const noexcept {
    double s = 0.0;
    for (int a = 0; a < nu_; ++a) {
        const double k = momentum(flat, a);
        s += k * k;
    }
    return std::sqrt(s);
}

double MomentumGrid::position_norm(std::size_t flat) const noexcept {
    double s = 0.0;
    for (int a = 0; a < nu_; ++a) {
        const double x = position(flat, a);
        s += x * x;
    }
    return std::sqrt(s);
}

void MomentumGrid::transform(std::span<const cplx> in, std::span<cplx> out, bool forward) const {
    if (in.size() != size_ || out.size() != size_) fail(ErrorKind::dimension, "array does not match grid size");
    const auto& p = *plan_;
    for (std::size_t j = 0; j < size_; ++j) out[j] = p.parity[j] * in[j];
    auto* buf = reinterpret_cast<fftw_complex*>(out.data());
    fftw_execute_dft(forward ? p.backward : p.forward, buf, buf);
    for (std::size_t j = 0; j < size_; ++j) out[j] *= p.scale * p.parity[j];
}

void MomentumGrid::to_position(std::span<const cplx> mom, std::span<cplx> pos) const { transform(mom, pos, true); }

void MomentumGrid::to_momentum(std::span<const cplx> pos, std::span<cplx> mom) const {
    transform(pos, mom, false);
}

MomentumGrid build_grid(int nu, int n_per_axis, double k_max) { return MomentumGrid(nu, n_per_axis, k_max); }

// ---------------------------------------------------------------------------

double norm2(std::span<const cplx> a) noexcept {
    double s = 0.0;
    for (const cplx& v : a) s += std::norm(v);
    return s;
}

cplx inner(std::span<const cplx> a, std::span<const cplx> b) noexcept {
    cplx s{0.0, 0.0};
    for (std::size_t j = 0; j < a.size(); ++j) s += std::conj(a[j]) * b[j];
    return s;
}

double FiberState::norm2() const noexcept { return std::norm(vacuum) + fibscat::norm2(field); }
double FiberState::norm() const noexcept { return std::sqrt(norm2()); }

FiberState& FiberState::operator+=(const FiberState& o) {
    if (o.field.size() != field.size()) fail(ErrorKind::dimension, "state size mismatch");
    vacuum += o.vacuum;
    for (std::size_t j = 0; j < field.size(); ++j) field[j] += o.field[j];
    return *this;
}

FiberState& FiberState::operator-=(const FiberState& o) {
    if (o.field.size() != field.size()) fail(ErrorKind::dimension, "state size mismatch");
    vacuum -= o.vacuum;
    for (std::size_t j = 0; j < field.size(); ++j) field[j] -= o.field[j];
    return *this;
}

FiberState& FiberState::operator*=(cplx a) {
    vacuum *= a;
    for (auto& v : field) v *= a;
    return *this;
}

FiberState operator+(FiberState a, const FiberState& b) { return a += b; }
FiberState operator-(FiberState a, const FiberState& b) { return a -= b; }
FiberState operator*(cplx a, FiberState b) { return b *= a; }

cplx inner(const FiberState& a, const FiberState& b) {
    if (a.field.size() != b.field.size()) fail(ErrorKind::dimension, "state size mismatch");
    return std::conj(a.vacuum) * b.vacuum + inner(std::span<const cplx>(a.field), std::span<const cplx>(b.field));
}

double boundary_mass(const MomentumGrid& grid, const FiberState& psi, double fraction) {
    if (psi.size() != grid.size()) fail(ErrorKind::dimension, "state does not match grid");
    std::vector<cplx> pos(grid.size());
    grid.to_position(psi.field, pos);
    const double limit = fraction * grid.box_length();
    double mass = 0.0;
    for (std::size_t j = 0; j < pos.size(); ++j)
        if (grid.position_norm(j) > limit) mass += std::norm(pos[j]);
    return mass;
}

// ---------------------------------------------------------------------------
// State serialization: vacuum (re, im) then field row-major (re, im).

void write_state_csv(std::ostream& os, const FiberState& s) {
    char line[96];
    std::snprintf(line, sizeof line, "%.17g,%.17g\n", s.vacuum.real(), s.vacuum.imag());
    os << line;
    for (const cplx& v : s.field) {
        std::snprintf(line, sizeof line, "%.17g,%.17g\n", v.real(), v.imag());
        os << line;
    }
}

FiberState read_state_csv(std::istream& is, std::size_t expected_size) {
    std::vector<cplx> values;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        double re = 0.0, im = 0.0;
        char comma = 0;
        if (!(ls >> re >> comma >> im) || comma != ',')
            fail(ErrorKind::configuration, "malformed state line '" + line + "'");
        values.emplace_back(re, im);
    }
    if (values.size() != expected_size + 1)
        fail(ErrorKind::dimension, "state file has " + std::to_string(values.size()) + " entries, expected " +
                                       std::to_string(expected_size + 1));
    FiberState s(values[0], std::vector<cplx>(values.begin() + 1, values.end()));
    return s;
}

void write_state_binary(std::ostream& os, const FiberState& s) {
    os.write(reinterpret_cast<const char*>(&s.vacuum), sizeof(cplx));
    os.write(reinterpret_cast<const char*>(s.field.data()), static_cast<std::streamsize>(s.field.size() * sizeof(cplx)));
}

FiberState read_state_binary(std::istream& is, std::size_t expected_size) {
    FiberState s(expected_size);
    is.read(reinterpret_cast<char*>(&s.vacuum), sizeof(cplx));
    is.read(reinterpret_cast<char*>(s.field.data()), static_cast<std::streamsize>(expected_size * sizeof(cplx)));
    if (!is) fail(ErrorKind::dimension, "binary state file too short");
    if (is.peek() != std::char_traits<char>::eof()) fail(ErrorKind::dimension, "binary state file too long");
    return s;
}

}  // namespace fibscat
