#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fibscat {

enum class DispersionFamily {
    nonrelativistic,  // r^2 / 2M
    relativistic,     // sqrt(r^2 + M^2)
    constant,         // w0
};

enum class CouplingFamily {
    gaussian,       // rho_hat(k) = g exp(-sigma^2 k^2 / 2)
    smooth_cutoff,  // rho_hat(k) = g bump(|k| / sigma), compact support
    power,          // rho(x) = g <x>^(-decay), position space only (nu = 1 for rho_hat)
};

std::string_view to_string(DispersionFamily f) noexcept;
std::string_view to_string(CouplingFamily f) noexcept;
DispersionFamily parse_dispersion_family(std::string_view name);
CouplingFamily parse_coupling_family(std::string_view name);

/// Radial dispersion relation phi(|x|). `mass` is M (or m), `level` the
/// constant value for the constant family.
struct Dispersion {
    DispersionFamily family = DispersionFamily::nonrelativistic;
    double mass = 1.0;
    double level = 0.0;

    double radial(double r) const noexcept;
    double radial_d1(double r) const noexcept;
    double radial_d2(double r) const noexcept;
    /// Odd extension of phi' to negative arguments (derivative along an axis).
    double axial_d1(double s) const noexcept;
    bool flat() const noexcept { return family == DispersionFamily::constant; }
    /// Growth exponent s with |phi| ~ <r>^s.
    double growth_exponent() const noexcept;
};

struct Coupling {
    CouplingFamily family = CouplingFamily::gaussian;
    double g = 0.1;
    double sigma = 1.0;
    double decay = 2.0;  // power family exponent
    /// Short-range constant C in |rho(x)| <= C <x>^(-1-nu/2-mu); computed when absent.
    std::optional<double> decay_constant;
};

enum class Quantity { Omega, omega, rho_pos, rho_mom };
enum class Order { value, gradient, hessian };

Quantity parse_quantity(std::string_view name);
Order parse_order(std::string_view name);

/// Result of eval_model; only the member matching `order` is filled.
struct Evaluation {
    Order order = Order::value;
    double value = 0.0;
    std::vector<double> gradient;
    std::vector<double> hessian;  // row-major nu x nu
};

/// The triple (Omega, omega, rho) in dimension nu, immutable after construction.
class DispersionModel {
public:
    DispersionModel(int nu, Dispersion matter, Dispersion field, Coupling coupling, double mu);

    int nu() const noexcept { return nu_; }
    const Dispersion& matter() const noexcept { return matter_; }
    const Dispersion& field() const noexcept { return field_; }
    const Coupling& coupling() const noexcept { return coupling_; }
    double mu() const noexcept { return mu_; }
    double s_Omega() const noexcept { return matter_.growth_exponent(); }

    /// Same model with coupling strength g replaced (rho = 0 for g = 0).
    DispersionModel with_coupling_strength(double g) const;

    double Omega(std::span<const double> eta) const;
    double omega(std::span<const double> k) const;
    /// Omega(P - k) + omega(k).
    double free_energy(std::span<const double> P, std::span<const double> k) const;

    /// Radial profiles of rho in both representations.
    double rho_mom_radial(double r) const;
    double rho_mom_radial_d1(double r) const;
    double rho_mom_radial_d2(double r) const;
    double rho_pos_radial(double r) const;
    double rho_pos_radial_d1(double r) const;
    bool rho_pos_has_hessian() const noexcept;
    bool rho_mom_available() const noexcept;

    /// Continuum ||rho||^2 = int |rho_hat|^2 dk (radial quadrature).
    double rho_norm2() const;
    /// int_{|k| > radius} |rho_hat|^2 dk (radial quadrature).
    double rho_mom_tail_mass(double radius) const;

private:
    int nu_;
    Dispersion matter_;
    Dispersion field_;
    Coupling coupling_;
    double mu_;
};

/// grad_k F_P(k) = grad omega(k) - grad Omega(P - k).
void group_velocity(const DispersionModel& model, std::span<const double> P, std::span<const double> k,
                    std::span<double> out);

Evaluation eval_model(const DispersionModel& model, Quantity which, std::span<const double> point,
                      Order order);

struct ClauseResult {
    std::string clause;  // e.g. "2.ii"
    std::string description;
    bool pass = true;
    std::optional<double> witness_radius;
    std::string detail;
};

struct ValidationReport {
    std::vector<ClauseResult> clauses;
    bool all_pass() const noexcept;
    const ClauseResult* find(std::string_view clause) const noexcept;
};

struct ValidationOptions {
    double r_max = 1e4;
    int samples = 240;
};

ValidationReport validate_conditions(const DispersionModel& model, const ValidationOptions& opts = {});

/// Surface area of the unit sphere S^(nu-1).
double unit_sphere_area(int nu) noexcept;

}  // namespace fibscat
