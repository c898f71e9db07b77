#include "fibscat/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "fibscat/errors.hpp"
#include "fibscat/smooth.hpp"

namespace fibscat {

namespace {

constexpr double kSqrt2Pi = 2.5066282746310002;

double norm_of(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

// Derivatives of bump(s) = exp(1 - 1/(1-s^2)).
double bump_d1(double s) {
    const double q = 1.0 - s * s;
    if (q <= 0.0) return 0.0;
    return bump(s) * (-2.0 * s / (q * q));
}

double bump_d2(double s) {
    const double q = 1.0 - s * s;
    if (q <= 0.0) return 0.0;
    const double q2 = q * q;
    return bump(s) * (4.0 * s * s / (q2 * q2) - 2.0 / q2 - 8.0 * s * s / (q2 * q));
}

// Composite Gauss-Legendre on [a, b] with `panels` panels.
template <class F>
double composite_gauss(F&& f, double a, double b, int panels) {
    using boost::math::quadrature::gauss;
    const double h = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * h;
        total += gauss<double, 15>::integrate(f, lo, lo + h);
    }
    return total;
}

// Embeds a radial profile into R^nu at `point`.
Evaluation radial_evaluation(std::span<const double> x, Order order, double r, double f0, double f1,
                             double f2) {
    const std::size_t nu = x.size();
    Evaluation out;
    out.order = order;
    switch (order) {
    case Order::value: out.value = f0; break;
    case Order::gradient:
        out.gradient.assign(nu, 0.0);
        if (r > 0.0)
            for (std::size_t i = 0; i < nu; ++i) out.gradient[i] = f1 * x[i] / r;
        break;
    case Order::hessian:
        out.hessian.assign(nu * nu, 0.0);
        if (r > 0.0) {
            const double transverse = f1 / r;
            for (std::size_t i = 0; i < nu; ++i)
                for (std::size_t j = 0; j < nu; ++j) {
                    const double xx = x[i] * x[j] / (r * r);
                    out.hessian[i * nu + j] = f2 * xx + transverse * ((i == j ? 1.0 : 0.0) - xx);
                }
        } else {
            for (std::size_t i = 0; i < nu; ++i) out.hessian[i * nu + i] = f2;
        }
        break;
    }
    return out;
}

}  // namespace

std::string_view to_string(DispersionFamily f) noexcept {
    switch (f) {
    case DispersionFamily::nonrelativistic: return "nonrelativistic";
    case DispersionFamily::relativistic: return "relativistic";
    case DispersionFamily::constant: return "constant";
    }
    return "?";
}

std::string_view to_string(CouplingFamily f) noexcept {
    switch (f) {
    case CouplingFamily::gaussian: return "gaussian";
    case CouplingFamily::smooth_cutoff: return "smooth_cutoff";
    case CouplingFamily::power: return "power";
    }
    return "?";
}

DispersionFamily parse_dispersion_family(std::string_view name) {
    if (name == "nonrelativistic") return DispersionFamily::nonrelativistic;
    if (name == "relativistic") return DispersionFamily::relativistic;
    if (name == "constant") return DispersionFamily::constant;
    fail(ErrorKind::configuration, "unknown dispersion family '" + std::string(name) + "'");
}

CouplingFamily parse_coupling_family(std::string_view name) {
    if (name == "gaussian") return CouplingFamily::gaussian;
    if (name == "smooth_cutoff") return CouplingFamily::smooth_cutoff;
    if (name == "power") return CouplingFamily::power;
    fail(ErrorKind::configuration, "unknown coupling family '" + std::string(name) + "'");
}

Quantity parse_quantity(std::string_view name) {
    if (name == "Omega") return Quantity::Omega;
    if (name == "omega") return Quantity::omega;
    if (name == "rho_pos") return Quantity::rho_pos;
    if (name == "rho_mom") return Quantity::rho_mom;
    fail(ErrorKind::configuration, "unknown model quantity '" + std::string(name) + "'");
}

Order parse_order(std::string_view name) {
    if (name == "value") return Order::value;
    if (name == "gradient") return Order::gradient;
    if (name == "hessian") return Order::hessian;
    fail(ErrorKind::configuration, "unknown evaluation order '" + std::string(name) + "'");
}

double unit_sphere_area(int nu) noexcept {
    switch (nu) {
    case 1: return 2.0;
    case 2: return 2.0 * std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi;
    default: return 2.0 * std::pow(std::numbers::pi, 0.5 * nu) / std::tgamma(0.5 * nu);
    }
}

// ---------------------------------------------------------------------------
// Dispersion

double Dispersion::radial(double r) const noexcept {
    switch (family) {
    case DispersionFamily::nonrelativistic: return r * r / (2.0 * mass);
    case DispersionFamily::relativistic: return std::hypot(r, mass);
    case DispersionFamily::constant: return level;
    }
    return 0.0;
}

double Dispersion::radial_d1(double r) const noexcept {
    switch (family) {
    case DispersionFamily::nonrelativistic: return r / mass;
    case DispersionFamily::relativistic: {
        const double e = std::hypot(r, mass);
        return e > 0.0 ? r / e : 0.0;
    }
    case DispersionFamily::constant: return 0.0;
    }
    return 0.0;
}

double Dispersion::radial_d2(double r) const noexcept {
    switch (family) {
    case DispersionFamily::nonrelativistic: return 1.0 / mass;
    case DispersionFamily::relativistic: {
        const double e = std::hypot(r, mass);
        if (e == 0.0) return std::numeric_limits<double>::infinity();
        return mass * mass / (e * e * e);
    }
    case DispersionFamily::constant: return 0.0;
    }
    return 0.0;
}

double Dispersion::axial_d1(double s) const noexcept {
    const double d = radial_d1(std::abs(s));
    return s < 0.0 ? -d : d;
}

double Dispersion::growth_exponent() const noexcept {
    switch (family) {
    case DispersionFamily::nonrelativistic: return 2.0;
    case DispersionFamily::relativistic: return 1.0;
    case DispersionFamily::constant: return 0.0;
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// DispersionModel

DispersionModel::DispersionModel(int nu, Dispersion matter, Dispersion field, Coupling coupling, double mu)
    : nu_(nu), matter_(matter), field_(field), coupling_(coupling), mu_(mu) {
    if (nu < 1 || nu > 3) fail(ErrorKind::configuration, "nu must be 1, 2 or 3");
    for (const Dispersion* d : {&matter_, &field_}) {
        if (d->family == DispersionFamily::nonrelativistic && !(d->mass > 0.0))
            fail(ErrorKind::configuration, "nonrelativistic dispersion needs mass > 0");
        if (d->family == DispersionFamily::relativistic && !(d->mass >= 0.0))
            fail(ErrorKind::configuration, "relativistic dispersion needs mass >= 0");
        if (!std::isfinite(d->mass) || !std::isfinite(d->level))
            fail(ErrorKind::configuration, "dispersion parameters must be finite");
    }
    if (!(coupling_.sigma > 0.0) || !std::isfinite(coupling_.sigma))
        fail(ErrorKind::configuration, "rho.sigma must be positive");
    if (!std::isfinite(coupling_.g)) fail(ErrorKind::configuration, "rho.g must be finite");
    if (coupling_.family == CouplingFamily::power && !(coupling_.decay > 0.0))
        fail(ErrorKind::configuration, "rho.decay must be positive");
    if (!(mu_ > 0.0)) fail(ErrorKind::configuration, "mu must be positive");
}

DispersionModel DispersionModel::with_coupling_strength(double g) const {
    Coupling c = coupling_;
    c.g = g;
    if (c.decay_constant && coupling_.g != 0.0) *c.decay_constant *= std::abs(g / coupling_.g);
    return DispersionModel(nu_, matter_, field_, c, mu_);
}

double DispersionModel::Omega(std::span<const double> eta) const {
    if (eta.size() != static_cast<std::size_t>(nu_)) fail(ErrorKind::dimension, "point has wrong dimension");
    return matter_.radial(norm_of(eta));
}

double DispersionModel::omega(std::span<const double> k) const {
    if (k.size() != static_cast<std::size_t>(nu_)) fail(ErrorKind::dimension, "point has wrong dimension");
    return field_.radial(norm_of(k));
}

double DispersionModel::free_energy(std::span<const double> P, std::span<const double> k) const {
    if (P.size() != k.size() || k.size() != static_cast<std::size_t>(nu_))
        fail(ErrorKind::dimension, "point has wrong dimension");
    double s = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) s += (P[i] - k[i]) * (P[i] - k[i]);
    return matter_.radial(std::sqrt(s)) + field_.radial(norm_of(k));
}

bool DispersionModel::rho_mom_available() const noexcept {
    return coupling_.family != CouplingFamily::power || nu_ == 1;
}

double DispersionModel::rho_mom_radial(double r) const {
    const Coupling& c = coupling_;
    switch (c.family) {
    case CouplingFamily::gaussian: return c.g * std::exp(-0.5 * c.sigma * c.sigma * r * r);
    case CouplingFamily::smooth_cutoff: return c.g * bump(r / c.sigma);
    case CouplingFamily::power: {
        if (nu_ != 1) fail(ErrorKind::unsupported_order, "power coupling has no momentum form for nu > 1");
        // int e^{-ikx} (1+x^2)^{-s} dx = 2 sqrt(pi)/Gamma(s) (|k|/2)^{s-1/2} K_{s-1/2}(|k|)
        const double s = 0.5 * c.decay;
        if (r == 0.0) {
            if (s <= 0.5) return std::numeric_limits<double>::infinity();
            return c.g / kSqrt2Pi * std::sqrt(std::numbers::pi) * std::tgamma(s - 0.5) / std::tgamma(s);
        }
        const double ft = 2.0 * std::sqrt(std::numbers::pi) / std::tgamma(s) * std::pow(0.5 * r, s - 0.5) *
                          std::cyl_bessel_k(s - 0.5, r);
        return c.g * ft / kSqrt2Pi;
    }
    }
    return 0.0;
}

double DispersionModel::rho_mom_radial_d1(double r) const {
    const Coupling& c = coupling_;
    switch (c.family) {
    case CouplingFamily::gaussian: return -c.sigma * c.sigma * r * rho_mom_radial(r);
    case CouplingFamily::smooth_cutoff: return c.g * bump_d1(r / c.sigma) / c.sigma;
    case CouplingFamily::power: break;
    }
    fail(ErrorKind::unsupported_order, "power coupling stores no momentum-space derivatives");
}

double DispersionModel::rho_mom_radial_d2(double r) const {
    const Coupling& c = coupling_;
    switch (c.family) {
    case CouplingFamily::gaussian: {
        const double s2 = c.sigma * c.sigma;
        return (s2 * s2 * r * r - s2) * rho_mom_radial(r);
    }
    case CouplingFamily::smooth_cutoff: return c.g * bump_d2(r / c.sigma) / (c.sigma * c.sigma);
    case CouplingFamily::power: break;
    }
    fail(ErrorKind::unsupported_order, "power coupling stores no momentum-space derivatives");
}

double DispersionModel::rho_pos_radial(double r) const {
    const Coupling& c = coupling_;
    switch (c.family) {
    case CouplingFamily::gaussian:
        return c.g * std::pow(c.sigma, -nu_) * std::exp(-0.5 * r * r / (c.sigma * c.sigma));
    case CouplingFamily::power: return c.g * std::pow(1.0 + r * r, -0.5 * c.decay);
    case CouplingFamily::smooth_cutoff: {
        // radial inverse Fourier transform of the compact momentum profile
        const double a = c.sigma;
        const int panels = 8 + 2 * static_cast<int>(std::ceil(a * r / std::numbers::pi));
        switch (nu_) {
        case 1:
            return 2.0 / kSqrt2Pi *
                   composite_gauss([&](double k) { return rho_mom_radial(k) * std::cos(k * r); }, 0.0, a, panels);
        case 2:
            return composite_gauss([&](double k) { return rho_mom_radial(k) * std::cyl_bessel_j(0.0, k * r) * k; },
                                   0.0, a, panels);
        default:
            return 4.0 * std::numbers::pi / (kSqrt2Pi * kSqrt2Pi * kSqrt2Pi) *
                   composite_gauss(
                       [&](double k) {
                           const double u = k * r;
                           const double sinc = u == 0.0 ? 1.0 : std::sin(u) / u;
                           return rho_mom_radial(k) * k * k * sinc;
                       },
                       0.0, a, panels);
        }
    }
    }
    return 0.0;
}

double DispersionModel::rho_pos_radial_d1(double r) const {
    const Coupling& c = coupling_;
    switch (c.family) {
    case CouplingFamily::gaussian: return -r / (c.sigma * c.sigma) * rho_pos_radial(r);
    case CouplingFamily::power: return -c.decay * c.g * r * std::pow(1.0 + r * r, -0.5 * c.decay - 1.0);
    case CouplingFamily::smooth_cutoff: {
        if (r == 0.0) return 0.0;
        const double a = c.sigma;
        const int panels = 8 + 2 * static_cast<int>(std::ceil(a * r / std::numbers::pi));
        switch (nu_) {
        case 1:
            return -2.0 / kSqrt2Pi *
                   composite_gauss([&](double k) { return rho_mom_radial(k) * k * std::sin(k * r); }, 0.0, a,
                                   panels);
        case 2:
            return -composite_gauss(
                [&](double k) { return rho_mom_radial(k) * k * k * std::cyl_bessel_j(1.0, k * r); }, 0.0, a,
                panels);
        default:
            return 4.0 * std::numbers::pi / (kSqrt2Pi * kSqrt2Pi * kSqrt2Pi) *
                   composite_gauss(
                       [&](double k) {
                           const double u = k * r;
                           const double dsinc = (u * std::cos(u) - std::sin(u)) / (u * u);
                           return rho_mom_radial(k) * k * k * k * dsinc;
                       },
                       0.0, a, panels);
        }
    }
    }
    return 0.0;
}

bool DispersionModel::rho_pos_has_hessian() const noexcept {
    return coupling_.family != CouplingFamily::smooth_cutoff;
}

double DispersionModel::rho_norm2() const {
    const Coupling& c = coupling_;
    const double area = unit_sphere_area(nu_);
    switch (c.family) {
    case CouplingFamily::gaussian: return c.g * c.g * std::pow(std::numbers::pi / (c.sigma * c.sigma), 0.5 * nu_);
    case CouplingFamily::smooth_cutoff:
        return area * composite_gauss(
                          [&](double k) {
                              const double v = rho_mom_radial(k);
                              return v * v * std::pow(k, nu_ - 1);
                          },
                          0.0, c.sigma, 32);
    case CouplingFamily::power: {
        boost::math::quadrature::exp_sinh<double> integrator;
        const double a = c.decay;
        return area * c.g * c.g *
               integrator.integrate([&](double r) { return std::pow(1.0 + r * r, -a) * std::pow(r, nu_ - 1); });
    }
    }
    return 0.0;
}

double DispersionModel::rho_mom_tail_mass(double radius) const {
    const Coupling& c = coupling_;
    if (c.g == 0.0) return 0.0;
    const double area = unit_sphere_area(nu_);
    switch (c.family) {
    case CouplingFamily::gaussian: {
        const double s = c.sigma, g2 = c.g * c.g, e = std::exp(-s * s * radius * radius);
        switch (nu_) {
        case 1: return g2 * std::sqrt(std::numbers::pi) / s * std::erfc(s * radius);
        case 2: return area * g2 * e / (2.0 * s * s);
        default:
            return area * g2 *
                   (radius * e / (2.0 * s * s) + std::sqrt(std::numbers::pi) / (4.0 * s * s * s) * std::erfc(s * radius));
        }
    }
    case CouplingFamily::smooth_cutoff:
        if (radius >= c.sigma) return 0.0;
        return area * composite_gauss(
                          [&](double k) {
                              const double v = rho_mom_radial(k);
                              return v * v * std::pow(k, nu_ - 1);
                          },
                          radius, c.sigma, 32);
    case CouplingFamily::power: {
        boost::math::quadrature::exp_sinh<double> integrator;
        return area * integrator.integrate(
                          [&](double k) {
                              const double v = rho_mom_radial(k);
                              return v * v;
                          },
                          radius, std::numeric_limits<double>::infinity());
    }
    }
    return 0.0;
}

// ---------------------------------------------------------------------------

void group_velocity(const DispersionModel& model, std::span<const double> P, std::span<const double> k,
                    std::span<double> out) {
    const std::size_t nu = k.size();
    double rk = 0.0, rd = 0.0;
    for (std::size_t a = 0; a < nu; ++a) {
        rk += k[a] * k[a];
        rd += (P[a] - k[a]) * (P[a] - k[a]);
    }
    rk = std::sqrt(rk);
    rd = std::sqrt(rd);
    const double sw = rk > 0.0 ? model.field().radial_d1(rk) / rk : 0.0;
    const double sO = rd > 0.0 ? model.matter().radial_d1(rd) / rd : 0.0;
    for (std::size_t a = 0; a < nu; ++a) out[a] = sw * k[a] - sO * (P[a] - k[a]);
}

Evaluation eval_model(const DispersionModel& model, Quantity which, std::span<const double> point, Order order) {
    if (point.size() != static_cast<std::size_t>(model.nu()))
        fail(ErrorKind::dimension, "evaluation point has wrong dimension");
    for (double v : point)
        if (!std::isfinite(v)) fail(ErrorKind::domain, "evaluation point must be finite");
    const double r = norm_of(point);
    switch (which) {
    case Quantity::Omega:
    case Quantity::omega: {
        const Dispersion& d = which == Quantity::Omega ? model.matter() : model.field();
        return radial_evaluation(point, order, r, d.radial(r), d.radial_d1(r), d.radial_d2(r));
    }
    case Quantity::rho_mom: {
        if (!model.rho_mom_available())
            fail(ErrorKind::unsupported_order, "coupling family has no momentum form in this dimension");
        if (order == Order::value) return radial_evaluation(point, order, r, model.rho_mom_radial(r), 0.0, 0.0);
        const double d2 = order == Order::hessian ? model.rho_mom_radial_d2(r) : 0.0;
        return radial_evaluation(point, order, r, 0.0, model.rho_mom_radial_d1(r), d2);
    }
    case Quantity::rho_pos: {
        if (order == Order::value) return radial_evaluation(point, order, r, model.rho_pos_radial(r), 0.0, 0.0);
        if (order == Order::gradient) return radial_evaluation(point, order, r, 0.0, model.rho_pos_radial_d1(r), 0.0);
        if (!model.rho_pos_has_hessian())
            fail(ErrorKind::unsupported_order, "smooth_cutoff coupling stores no position-space hessian");
        const Coupling& c = model.coupling();
        double d1 = model.rho_pos_radial_d1(r), d2 = 0.0;
        if (c.family == CouplingFamily::gaussian) {
            const double s2 = c.sigma * c.sigma;
            d2 = (r * r / (s2 * s2) - 1.0 / s2) * model.rho_pos_radial(r);
        } else {
            const double a = c.decay, q = 1.0 + r * r;
            d2 = -a * c.g * std::pow(q, -0.5 * a - 1.0) + a * (a + 2.0) * c.g * r * r * std::pow(q, -0.5 * a - 2.0);
        }
        return radial_evaluation(point, order, r, 0.0, d1, d2);
    }
    }
    fail(ErrorKind::configuration, "unknown quantity");
}

// ---------------------------------------------------------------------------
// Condition checks

bool ValidationReport::all_pass() const noexcept {
    return std::all_of(clauses.begin(), clauses.end(), [](const ClauseResult& c) { return c.pass; });
}

const ClauseResult* ValidationReport::find(std::string_view clause) const noexcept {
    for (const auto& c : clauses)
        if (c.clause == clause) return &c;
    return nullptr;
}

namespace {

std::vector<double> sample_radii(const ValidationOptions& opts) {
    std::vector<double> radii{0.0};
    const double lo = std::log(1e-3), hi = std::log(opts.r_max);
    for (int i = 0; i < opts.samples; ++i) radii.push_back(std::exp(lo + (hi - lo) * i / (opts.samples - 1)));
    return radii;
}

double japanese(double r) { return std::sqrt(1.0 + r * r); }

// Bounded-ness surrogate: the sampled quantity on the last decade must not
// exceed twice its maximum over the smaller radii.
struct TailCheck {
    bool pass = true;
    double witness = 0.0;
};

template <class F>
TailCheck tail_bounded(const std::vector<double>& radii, double r_max, F&& q) {
    double head = 0.0;
    for (double r : radii)
        if (r < 0.1 * r_max) head = std::max(head, std::abs(q(r)));
    TailCheck out;
    double worst = 0.0;
    for (double r : radii) {
        if (r < 0.1 * r_max) continue;
        const double v = std::abs(q(r));
        if (v > 2.0 * head + 1e-12 && v > worst) {
            worst = v;
            out.pass = false;
            out.witness = r;
        }
    }
    return out;
}

ClauseResult analytic_clause(const char* id, const char* name, const Dispersion& d) {
    ClauseResult c{id, std::string(name) + " real-analytic and rotation invariant", true, {}, ""};
    if (d.family == DispersionFamily::relativistic && d.mass == 0.0) {
        c.pass = false;
        c.witness_radius = 0.0;
        c.detail = "massless relativistic dispersion |k| is not analytic at the origin";
    } else {
        c.detail = "radial closed form (" + std::string(to_string(d.family)) + ")";
    }
    return c;
}

ClauseResult nonnegative_clause(const char* id, const char* name, const Dispersion& d,
                                const std::vector<double>& radii) {
    ClauseResult c{id, std::string(name) + " nonnegative", true, {}, "sampled"};
    for (double r : radii)
        if (d.radial(r) < 0.0) {
            c.pass = false;
            c.witness_radius = r;
            c.detail = "negative value";
            break;
        }
    return c;
}

}  // namespace

ValidationReport validate_conditions(const DispersionModel& model, const ValidationOptions& opts) {
    ValidationReport report;
    const auto radii = sample_radii(opts);
    const Dispersion& Om = model.matter();
    const Dispersion& om = model.field();
    const double s = model.s_Omega();
    const int nu = model.nu();

    report.clauses.push_back(analytic_clause("1.a", "Omega", Om));
    report.clauses.push_back(nonnegative_clause("1.b", "Omega", Om, radii));
    {
        ClauseResult c{"1.i", "Omega >= <eta>^s / C - C", true, {}, ""};
        // each shipped family grows exactly like <eta>^s
        const double ratio = Om.radial(opts.r_max) / std::pow(japanese(opts.r_max), s);
        c.pass = ratio > 0.0 || s == 0.0;
        c.detail = "s_Omega = " + std::to_string(s);
        if (!c.pass) c.witness_radius = opts.r_max;
        report.clauses.push_back(c);
    }
    {
        ClauseResult c{"1.ii", "|d^a Omega| <= C <eta>^(s-|a|)", true, {}, "sampled, |a| = 1, 2"};
        auto t1 = tail_bounded(radii, opts.r_max, [&](double r) { return Om.radial_d1(r) / std::pow(japanese(r), s - 1); });
        auto t2 = tail_bounded(radii, opts.r_max, [&](double r) { return Om.radial_d2(r) / std::pow(japanese(r), s - 2); });
        auto t3 = tail_bounded(radii, opts.r_max,
                               [&](double r) { return r > 0 ? Om.radial_d1(r) / r / std::pow(japanese(r), s - 2) : 0.0; });
        for (const auto& t : {t1, t2, t3})
            if (!t.pass) {
                c.pass = false;
                c.witness_radius = t.witness;
            }
        report.clauses.push_back(c);
    }

    report.clauses.push_back(analytic_clause("2.a", "omega", om));
    report.clauses.push_back(nonnegative_clause("2.b", "omega", om, radii));
    {
        ClauseResult c{"2.i", "sup |d^a omega| < inf for |a| >= 1", true, {}, "sampled, |a| = 1, 2"};
        auto t1 = tail_bounded(radii, opts.r_max, [&](double r) { return om.radial_d1(r); });
        auto t2 = tail_bounded(radii, opts.r_max, [&](double r) { return r > 0 ? om.radial_d2(r) : 0.0; });
        auto t3 = tail_bounded(radii, opts.r_max, [&](double r) { return r > 0 ? om.radial_d1(r) / r : 0.0; });
        for (const auto& t : {t1, t2, t3})
            if (!t.pass) {
                c.pass = false;
                c.witness_radius = t.witness;
                c.detail = "derivative of omega grows without bound";
            }
        report.clauses.push_back(c);
    }
    {
        ClauseResult c{"2.ii", "s_Omega = 0 implies omega -> inf", true, {}, ""};
        if (s == 0.0) {
            if (om.flat()) {
                c.pass = false;
                c.witness_radius = opts.r_max;
                c.detail = "omega bounded (constant family) while s_Omega = 0";
            } else {
                c.detail = "omega unbounded";
            }
        } else {
            c.detail = "vacuous (s_Omega > 0)";
        }
        report.clauses.push_back(c);
    }

    const Coupling& rho = model.coupling();
    {
        ClauseResult c{"3.i", "rho rotation invariant, rho_hat in C^2", true, {}, ""};
        if (rho.family == CouplingFamily::power) {
            // x^2 rho in L^1 is sufficient
            c.pass = rho.decay > nu + 2;
            c.detail = "sufficient condition decay > nu + 2";
        } else {
            c.detail = "smooth closed form";
        }
        report.clauses.push_back(c);
    }
    {
        ClauseResult c{"3.ii", "<k>|grad rho_hat|, <k>|hess rho_hat| in L^2", true, {}, ""};
        if (rho.family == CouplingFamily::power) {
            c.pass = rho.decay > 2.0 + 0.5 * nu;
            c.detail = "sufficient condition decay > 2 + nu/2";
        } else {
            c.detail = "Schwartz-class momentum profile";
        }
        report.clauses.push_back(c);
    }
    {
        ClauseResult c{"3.iii", "|rho(x)| <= C <x>^(-1-nu/2-mu)", true, {}, ""};
        const double e = 1.0 + 0.5 * nu + model.mu();
        auto q = [&](double r) { return std::abs(model.rho_pos_radial(r)) * std::pow(japanese(r), e); };
        double C = 0.0;
        if (rho.decay_constant) {
            C = *rho.decay_constant;
        } else {
            for (double r : radii)
                if (r <= 10.0) C = std::max(C, q(r));
        }
        double worst = 0.0;
        for (double r : radii) {
            const double v = q(r);
            if (v > C * (1.0 + 1e-9) + 1e-300 && v > worst) {
                worst = v;
                c.pass = false;
                c.witness_radius = r;
            }
        }
        c.detail = "C = " + std::to_string(C) + ", exponent " + std::to_string(e);
        if (!c.pass) c.detail += ", violated (decay too slow)";
        report.clauses.push_back(c);
    }
    return report;
}

}  // namespace fibscat
